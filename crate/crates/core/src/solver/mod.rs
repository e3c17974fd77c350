//! Optimal satisfaction probabilities and positional policies for Büchi,
//! parity and Rabin MDPs.
//!
//! The main route is accepting end components followed by maximal
//! reachability ([`optimal_policy`]). [`enumerate_policies_oracle`] is an
//! independent brute-force route that evaluates every positional policy on its
//! induced chain; tests compare the two.

mod oracle;
mod reach;

use std::collections::BTreeSet;

pub use oracle::{chain_values, enumerate_policies_oracle, policy_satisfaction_probability, policy_values, ORACLE_POLICY_LIMIT};
pub use reach::{evaluate_reach, max_reach_value, prob_positive, ReachResult, VI_MAX_ITERATIONS, VI_TOLERANCE};

use crate::acceptance::AcceptanceCondition;
use crate::graph::{mecs_restricted, EndComponent};
use crate::mdp::{Mdp, PositionalPolicy};

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub value: Vec<f64>,
    pub policy: PositionalPolicy,
    pub accepting_states: BTreeSet<usize>,
}

impl SolveResult {
    pub fn initial_value(&self, m: &Mdp) -> f64 {
        self.value[m.initial()]
    }
}

/// An end component in which the objective can be won with probability 1,
/// together with the states its internal policy must keep revisiting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcceptingEc {
    pub ec: EndComponent,
    pub witness: Vec<usize>,
}

fn all_actions(m: &Mdp, keep: impl Fn(usize) -> bool) -> Vec<Vec<usize>> {
    (0..m.num_states()).map(|s| if keep(s) { m.enabled(s).collect() } else { Vec::new() }).collect()
}

/// Maximal accepting end components.
///
/// * Büchi: MECs intersecting F.
/// * Parity (max-odd): a MEC whose largest priority is odd is accepting;
///   otherwise its largest-priority states are removed and the remaining
///   sub-MECs are examined recursively.
/// * Rabin: for every pair, MECs of the MDP with `Fin` removed that intersect
///   `Inf`. Components of different pairs may overlap.
pub fn accepting_ecs(m: &Mdp) -> Vec<AcceptingEc> {
    let mut out = Vec::new();
    match m.acceptance() {
        AcceptanceCondition::Buchi { accepting } => {
            for ec in mecs_restricted(m, all_actions(m, |_| true)) {
                let witness: Vec<usize> = ec.states().into_iter().filter(|s| accepting.contains(s)).collect();
                if !witness.is_empty() {
                    out.push(AcceptingEc { ec, witness });
                }
            }
        }
        AcceptanceCondition::Parity { priority } => {
            let mut work = mecs_restricted(m, all_actions(m, |_| true));
            while let Some(ec) = work.pop() {
                let states = ec.states();
                let max = states.iter().map(|&s| priority[s]).max().expect("end components are non-empty");
                if max % 2 == 1 {
                    let witness = states.iter().copied().filter(|&s| priority[s] == max).collect();
                    out.push(AcceptingEc { ec, witness });
                } else {
                    let allowed = (0..m.num_states())
                        .map(|s| match ec.actions.get(&s) {
                            Some(acts) if priority[s] < max => acts.clone(),
                            _ => Vec::new(),
                        })
                        .collect();
                    work.extend(mecs_restricted(m, allowed));
                }
            }
            out.sort_by_key(|a| a.ec.actions.keys().next().copied());
        }
        AcceptanceCondition::Rabin { pairs } => {
            for pair in pairs {
                for ec in mecs_restricted(m, all_actions(m, |s| !pair.fin.contains(&s))) {
                    let witness: Vec<usize> = ec.states().into_iter().filter(|s| pair.inf.contains(s)).collect();
                    if !witness.is_empty() {
                        out.push(AcceptingEc { ec, witness });
                    }
                }
            }
        }
    }
    out
}

/// Positional actions inside the accepting region: each component gets an
/// attractor toward its witness set (or toward states already handled by an
/// earlier, possibly overlapping, component) using only its own actions.
/// The region is closed under the returned choices and every BSCC it induces
/// is accepting.
pub fn accepting_region_policy(m: &Mdp, aecs: &[AcceptingEc]) -> Vec<Option<usize>> {
    let n = m.num_states();
    let mut assigned: Vec<Option<usize>> = vec![None; n];
    for aec in aecs {
        let states = aec.ec.states();
        let mut goal = vec![false; n];
        for &s in &aec.witness {
            goal[s] = true;
        }
        for &s in &states {
            if assigned[s].is_some() {
                goal[s] = true;
            }
        }
        loop {
            let mut grew = Vec::new();
            for &s in &states {
                if goal[s] {
                    continue;
                }
                let acts = &aec.ec.actions[&s];
                if let Some(&a) = acts.iter().find(|&&a| m.choice(s, a).expect("enabled").support().any(|t| goal[t])) {
                    assigned[s] = Some(a);
                    grew.push(s);
                }
            }
            if grew.is_empty() {
                break;
            }
            for s in grew {
                goal[s] = true;
            }
        }
        for &s in &aec.witness {
            if assigned[s].is_none() {
                assigned[s] = Some(aec.ec.actions[&s][0]);
            }
        }
        debug_assert!(states.iter().all(|&s| assigned[s].is_some()), "attractor must cover a strongly connected EC");
    }
    assigned
}

/// Optimal satisfaction probability from every state and a positional policy
/// attaining it from all states simultaneously.
pub fn optimal_policy(m: &Mdp) -> SolveResult {
    let aecs = accepting_ecs(m);
    let inside = accepting_region_policy(m, &aecs);
    let target: Vec<bool> = inside.iter().map(Option::is_some).collect();
    let reach = max_reach_value(m, &target);
    let mut policy = reach.policy;
    for (s, a) in inside.iter().enumerate() {
        if let Some(a) = a {
            policy.0[s] = *a;
        }
    }
    SolveResult {
        value: reach.value,
        policy,
        accepting_states: target.iter().enumerate().filter(|(_, &b)| b).map(|(s, _)| s).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::figure1;

    #[test]
    fn figure1_buchi_on_s0() {
        let mut m = figure1::mdp(0.5);
        m.set_acceptance(AcceptanceCondition::buchi([0]));
        let aecs = accepting_ecs(&m);
        assert_eq!(aecs.len(), 1);
        assert_eq!(aecs[0].ec.states(), vec![0]);
        assert_eq!(aecs[0].ec.actions[&0], vec![figure1::ACTION_A]);
    }

    #[test]
    fn figure1_buchi_on_s1() {
        let mut m = figure1::mdp(0.5);
        m.set_acceptance(AcceptanceCondition::buchi([1]));
        let aecs = accepting_ecs(&m);
        assert_eq!(aecs.len(), 1);
        assert_eq!(aecs[0].ec.states(), vec![1]);
        assert_eq!(aecs[0].ec.actions[&1], vec![figure1::ACTION_A, figure1::ACTION_B]);
        // s1 is reached almost surely through b.
        let r = optimal_policy(&m);
        assert!((r.value[0] - 1.0).abs() < 1e-12);
        assert_eq!(r.policy.action(0), figure1::ACTION_B);
    }

    #[test]
    fn parity_recursion_finds_inner_odd_component() {
        // 0 <-> 1 via action 0; state 1 also has a self-loop (action 1).
        // priorities: 0 -> 2, 1 -> 1. The whole MEC has max 2 (even); removing
        // state 0 leaves {1} with its self-loop and max priority 1 (odd).
        let mut m = Mdp::new(2, 2, 0, AcceptanceCondition::parity(vec![2, 1]));
        m.add_transition(0, 0, 1, 1.0);
        m.add_transition(1, 0, 0, 1.0);
        m.add_transition(1, 1, 1, 1.0);
        let aecs = accepting_ecs(&m);
        assert_eq!(aecs.len(), 1);
        assert_eq!(aecs[0].ec.states(), vec![1]);
        assert_eq!(aecs[0].ec.actions[&1], vec![1]);
        let r = optimal_policy(&m);
        assert_eq!(r.value, vec![1.0, 1.0]);
        assert_eq!(r.policy.0, vec![0, 1]);
    }

    #[test]
    fn rabin_pair_excludes_fin_states() {
        // A 2-cycle where state 0 is in Fin and state 1 in Inf: no accepting EC,
        // unless state 1 can loop on its own.
        let mut m = Mdp::new(2, 1, 0, AcceptanceCondition::rabin(vec![(vec![0], vec![1])]));
        m.add_transition(0, 0, 1, 1.0);
        m.add_transition(1, 0, 0, 1.0);
        assert!(accepting_ecs(&m).is_empty());
        assert_eq!(optimal_policy(&m).value, vec![0.0, 0.0]);
    }
}
