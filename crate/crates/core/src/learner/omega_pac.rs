//! The learning loop.
//!
//! Each episode builds the optimistic model from the visit counts, computes
//! an optimal positional policy for it, and stops if every action of every
//! state reachable within `T` steps under that policy is known. Otherwise one
//! length-`T` trajectory is sampled from the true environment and the counts
//! are updated.
//!
//! States are discovered as they are sampled and numbered locally in
//! discovery order; nothing about the state space is known up front.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::acceptance::StateMark;
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::learner::counts::VisitCounts;
use crate::learner::optimistic::build_optimistic;
use crate::mdp::{Mdp, PositionalPolicy};
use crate::solver::optimal_policy;

/// Values within this distance of 1 count as fully optimistic.
const ONE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// Episode length `T` in transitions.
    pub horizon: usize,
    /// Known threshold.
    pub k: u64,
    pub seed: u64,
    /// Give up after this many sampled episodes.
    pub max_episodes: u64,
    /// Record every `trace_stride`-th episode in the trace (policy changes and
    /// the final row are always recorded).
    pub trace_stride: u64,
}

impl LearnerConfig {
    pub fn new(epsilon: f64, delta: f64, horizon: usize, k: u64, seed: u64) -> Self {
        LearnerConfig { epsilon, delta, horizon, k, seed, max_episodes: 10_000_000, trace_stride: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if self.horizon == 0 {
            return bad("T must be at least 1");
        }
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.trace_stride == 0 {
            return bad("trace stride must be at least 1");
        }
        Ok(())
    }
}

/// A policy over environment state ids, defined on the states discovered so
/// far.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnedPolicy(pub BTreeMap<usize, usize>);

impl LearnedPolicy {
    pub fn action(&self, s: usize) -> Option<usize> {
        self.0.get(&s).copied()
    }

    /// Total policy on `m`; undiscovered states take their lowest action.
    pub fn to_positional(&self, m: &Mdp) -> PositionalPolicy {
        PositionalPolicy(
            (0..m.num_states())
                .map(|s| self.action(s).unwrap_or_else(|| m.enabled(s).next().expect("validated model")))
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub episode: u64,
    /// Transitions sampled before this episode: `episode × T`.
    pub samples: u64,
    /// Transitions sampled so far from pairs that were unknown at the time.
    pub unknown_visits: u64,
    /// Optimal value of the optimistic model at the initial state.
    pub optimistic_value: f64,
    pub true_policy_value: Option<f64>,
    pub terminated: bool,
    /// Index into [`LearnTrace::policies`].
    pub policy_id: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnTrace {
    pub horizon: usize,
    pub rows: Vec<TraceRow>,
    /// Distinct consecutive policies with the episode they took effect.
    pub policies: Vec<(u64, LearnedPolicy)>,
}

impl LearnTrace {
    /// The policy in force after `i` sampled transitions. Policies change only
    /// at episode boundaries; past termination this is the returned policy.
    pub fn policy_at(&self, i: u64) -> &LearnedPolicy {
        let episode = i / self.horizon as u64;
        let idx = self.policies.partition_point(|(start, _)| *start <= episode);
        &self.policies[idx.saturating_sub(1)].1
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "episode",
            "samples",
            "unknown_visits",
            "optimistic_value",
            "true_policy_value",
            "terminated",
            "policy_id",
        ])?;
        for r in &self.rows {
            out.write_record([
                r.episode.to_string(),
                r.samples.to_string(),
                r.unknown_visits.to_string(),
                r.optimistic_value.to_string(),
                r.true_policy_value.map(|v| v.to_string()).unwrap_or_default(),
                r.terminated.to_string(),
                r.policy_id.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnOutcome {
    pub policy: LearnedPolicy,
    pub terminated: bool,
    /// Sampled episodes.
    pub episodes: u64,
    pub samples: u64,
    pub unknown_visits: u64,
    /// Optimal value of the final optimistic model.
    pub optimistic_value: f64,
    /// Number of optimistic-model solves.
    pub solves: u64,
    pub trace: LearnTrace,
}

/// Evaluates a learned policy on the true model, for the trace.
pub type PolicyEvaluator<'a> = &'a (dyn Fn(&LearnedPolicy) -> f64 + Sync);

struct Discovered {
    ids: Vec<usize>,
    local: HashMap<usize, usize>,
    enabled: Vec<Vec<usize>>,
    marks: Vec<StateMark>,
}

impl Discovered {
    fn intern<E: Environment + ?Sized>(&mut self, env: &E, s: usize) -> usize {
        if let Some(&i) = self.local.get(&s) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(s);
        self.local.insert(s, i);
        self.enabled.push(env.enabled_actions(s));
        self.marks.push(env.mark(s));
        i
    }
}

struct Plan {
    /// Actions for local states `0..policy.len()`.
    policy: Vec<usize>,
    value: f64,
    done: bool,
}

fn plan(d: &Discovered, counts: &VisitCounts, cfg: &LearnerConfig) -> Result<Plan> {
    let model = build_optimistic(counts, cfg.k, &d.enabled, &d.marks, 0)?;
    let solved = optimal_policy(&model.mdp);
    let mut policy = solved.policy.0;
    // Among optimal choices prefer exploring: at states already worth 1 an
    // unknown action is optimal too, and exploiting a known one could keep
    // the unknown actions of the reachable states unexplored forever.
    for (s, acts) in d.enabled.iter().enumerate() {
        if solved.value[s] >= 1.0 - ONE_TOLERANCE {
            if let Some(&a) = acts.iter().find(|&&a| !counts.is_known(s, a, cfg.k)) {
                policy[s] = a;
            }
        }
    }
    // An episode acts at steps 0..T-1 only, so states first reached at step T
    // never get their actions sampled.
    let reach = model.mdp.reachable_within(&PositionalPolicy(policy.clone()), cfg.horizon - 1);
    let done = reach
        .iter()
        .filter(|&&s| s != model.sink)
        .all(|&s| d.enabled[s].iter().all(|&a| counts.is_known(s, a, cfg.k)));
    policy.truncate(d.ids.len());
    Ok(Plan { value: solved.value[0], policy, done })
}

fn learned(d: &Discovered, policy: &[usize]) -> LearnedPolicy {
    LearnedPolicy(
        d.ids.iter().enumerate().map(|(i, &s)| (s, policy.get(i).copied().unwrap_or(d.enabled[i][0]))).collect(),
    )
}

pub fn omega_pac<E: Environment + ?Sized>(env: &E, cfg: &LearnerConfig) -> Result<LearnOutcome> {
    omega_pac_with(env, cfg, None)
}

/// Runs the learner; `evaluate`, if given, fills the trace's
/// `true_policy_value` column each time the policy changes.
pub fn omega_pac_with<E: Environment + ?Sized>(
    env: &E,
    cfg: &LearnerConfig,
    evaluate: Option<PolicyEvaluator<'_>>,
) -> Result<LearnOutcome> {
    cfg.validate()?;
    let mut rng = crate::rng_from_seed(cfg.seed);
    let mut d = Discovered { ids: Vec::new(), local: HashMap::new(), enabled: Vec::new(), marks: Vec::new() };
    let start = d.intern(env, env.initial());
    debug_assert_eq!(start, 0);
    let mut counts = VisitCounts::new();
    let mut trace = LearnTrace { horizon: cfg.horizon, rows: Vec::new(), policies: Vec::new() };

    let mut current = plan(&d, &counts, cfg)?;
    let mut solves = 1;
    let mut true_value = None;
    let mut changed = true;
    let mut episode = 0u64;
    let mut unknown_visits = 0u64;
    let mut steps = Vec::with_capacity(cfg.horizon);
    loop {
        let pol = learned(&d, &current.policy);
        if trace.policies.last().is_none_or(|(_, p)| *p != pol) {
            true_value = evaluate.map(|f| f(&pol));
            trace.policies.push((episode, pol));
            changed = true;
        }
        let stop = current.done || episode >= cfg.max_episodes;
        if changed || stop || episode % cfg.trace_stride == 0 {
            trace.rows.push(TraceRow {
                episode,
                samples: episode * cfg.horizon as u64,
                unknown_visits,
                optimistic_value: current.value,
                true_policy_value: true_value,
                terminated: current.done,
                policy_id: trace.policies.len() - 1,
            });
        }
        changed = false;
        if stop {
            break;
        }

        // one episode in the true environment
        steps.clear();
        let mut s = env.initial();
        let mut ls = 0usize;
        for _ in 0..cfg.horizon {
            let a = current.policy.get(ls).copied().unwrap_or(d.enabled[ls][0]);
            let t = env.step(s, a, &mut rng);
            let lt = d.intern(env, t);
            steps.push((ls, a, lt));
            s = t;
            ls = lt;
        }
        let outcome = counts.update(steps.iter().copied(), cfg.k);
        unknown_visits += outcome.unknown_visits;
        episode += 1;
        if !outcome.newly_known.is_empty() {
            current = plan(&d, &counts, cfg)?;
            solves += 1;
        }
    }

    let policy = trace.policies.last().expect("at least one policy").1.clone();
    Ok(LearnOutcome {
        policy,
        terminated: current.done,
        episodes: episode,
        samples: episode * cfg.horizon as u64,
        unknown_visits,
        optimistic_value: current.value,
        solves,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acceptance::AcceptanceCondition;
    use crate::experiments::figure1;

    #[test]
    fn figure1_returns_stay_policy() {
        let m = figure1::mdp(0.5);
        let cfg = LearnerConfig::new(0.25, 0.1, 5, 50, 3);
        let out = omega_pac(&m, &cfg).unwrap();
        assert!(out.terminated);
        assert_eq!(out.policy.action(figure1::S0), Some(figure1::ACTION_A));
        // b had to be explored before a could be trusted
        assert!(out.trace.policies.iter().any(|(_, p)| p.action(figure1::S0) == Some(figure1::ACTION_B)));
    }

    #[test]
    fn deterministic_mdp_with_k_one_is_exact() {
        // 0 -a0-> 1 (accepting loop), 0 -a1-> 2 (rejecting loop)
        let mut m = Mdp::new(3, 2, 0, AcceptanceCondition::buchi([1]));
        m.add_transition(0, 0, 1, 1.0);
        m.add_transition(0, 1, 2, 1.0);
        for s in [1, 2] {
            m.add_transition(s, 0, s, 1.0);
            m.add_transition(s, 1, s, 1.0);
        }
        let cfg = LearnerConfig::new(0.1, 0.1, 3, 1, 0);
        let out = omega_pac(&m, &cfg).unwrap();
        assert!(out.terminated);
        assert!(out.episodes <= 3 * 2 + 1);
        assert_eq!(out.policy.action(0), Some(0));
    }

    #[test]
    fn trace_invariants() {
        let m = figure1::mdp(0.5);
        let mut cfg = LearnerConfig::new(0.25, 0.1, 4, 20, 11);
        cfg.trace_stride = 3;
        let out = omega_pac(&m, &cfg).unwrap();
        let rows = &out.trace.rows;
        assert!(rows.iter().all(|r| r.samples == r.episode * 4));
        assert_eq!(rows.iter().filter(|r| r.terminated).count(), 1);
        assert!(rows.last().unwrap().terminated);
        assert_eq!(out.trace.policy_at(0), &out.trace.policies[0].1);
        assert_eq!(out.trace.policy_at(u64::MAX / 2), &out.policy);
    }

    #[test]
    fn episode_cap_reports_non_termination() {
        let m = figure1::mdp(0.5);
        let mut cfg = LearnerConfig::new(0.25, 0.1, 4, 1000, 1);
        cfg.max_episodes = 5;
        let out = omega_pac(&m, &cfg).unwrap();
        assert!(!out.terminated);
        assert_eq!(out.episodes, 5);
    }
}
