//! Model-free satisfaction estimate for Markov chains: sample trajectories,
//! classify each by the bottom SCC of the transitions it observed, and report
//! the winning fraction.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::acceptance::AcceptanceCondition;
use crate::error::{Error, Result};
use crate::graph::tarjan_scc;
use crate::learner::bounds::required_samples_c;
use crate::mdp::{MarkovChain, Trajectory};

/// Directed graph of the transitions observed along one path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryGraph {
    nodes: Vec<usize>,
    adj: Vec<Vec<usize>>,
    terminal: usize,
}

impl TrajectoryGraph {
    pub fn from_path(states: &[usize]) -> Result<Self> {
        let &terminal = states.last().ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))?;
        let mut index = BTreeMap::new();
        let mut nodes = Vec::new();
        for &s in states {
            index.entry(s).or_insert_with(|| {
                nodes.push(s);
                nodes.len() - 1
            });
        }
        let mut adj = vec![Vec::new(); nodes.len()];
        for w in states.windows(2) {
            let (u, v) = (index[&w[0]], index[&w[1]]);
            if !adj[u].contains(&v) {
                adj[u].push(v);
            }
        }
        Ok(TrajectoryGraph { nodes, adj, terminal: index[&terminal] })
    }

    /// The unique bottom SCC: the component of the terminal state, since
    /// every observed state has an observed path to it.
    pub fn bottom_scc(&self) -> Vec<usize> {
        let comp = tarjan_scc(&self.adj)
            .into_iter()
            .find(|c| c.contains(&self.terminal))
            .expect("every node lies in some component");
        let mut out: Vec<usize> = comp.into_iter().map(|i| self.nodes[i]).collect();
        out.sort_unstable();
        out
    }
}

/// Whether a sampled path counts as winning.
pub fn classify_path(states: &[usize], acceptance: &AcceptanceCondition) -> Result<bool> {
    Ok(acceptance.accepts(&TrajectoryGraph::from_path(states)?.bottom_scc()))
}

pub fn classify_trajectory(t: &Trajectory, acceptance: &AcceptanceCondition) -> Result<bool> {
    classify_path(&t.states, acceptance)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SatisfactionEstimate {
    pub p_hat: f64,
    pub samples: u64,
    pub wins: u64,
    /// Claimed accuracy `2ε`, valid with probability `1 − δ` when the
    /// horizon is at least the ε-recurrence time.
    pub half_width: f64,
    pub confidence: f64,
}

/// Samples `required_samples_c(ε, δ)` length-`horizon` trajectories of `c`
/// and returns the fraction classified as winning.
pub fn estimate_satisfaction_mc<R: rand::Rng + ?Sized>(
    c: &MarkovChain,
    horizon: usize,
    epsilon: f64,
    delta: f64,
    rng: &mut R,
) -> Result<SatisfactionEstimate> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let samples = required_samples_c(epsilon, delta)?;
    let mut wins = 0;
    for _ in 0..samples {
        if classify_path(&c.sample_path(horizon, rng), c.acceptance())? {
            wins += 1;
        }
    }
    Ok(SatisfactionEstimate {
        p_hat: wins as f64 / samples as f64,
        samples,
        wins,
        half_width: 2.0 * epsilon,
        confidence: 1.0 - delta,
    })
}
