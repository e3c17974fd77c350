//! Maximal reachability probabilities.

use crate::linalg::{backward_closure, reach_probabilities};
use crate::mdp::{Mdp, PositionalPolicy};

pub const VI_TOLERANCE: f64 = 1e-12;
pub const VI_MAX_ITERATIONS: usize = 1_000_000;
/// Two action values closer than this are treated as tied.
const TIE_TOLERANCE: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq)]
pub struct ReachResult {
    pub value: Vec<f64>,
    pub policy: PositionalPolicy,
}

/// States that reach `target` with positive probability under some policy.
pub fn prob_positive(m: &Mdp, target: &[bool]) -> Vec<bool> {
    // Any positive edge of any action counts, which is exactly the
    // existential backward closure.
    let rows: Vec<Vec<(usize, f64)>> = (0..m.num_states())
        .map(|s| m.choices(s).iter().flat_map(|c| c.successors.iter().copied()).collect())
        .collect();
    backward_closure(&rows, target)
}

fn q_value(m: &Mdp, s: usize, a: usize, v: &[f64]) -> f64 {
    m.choice(s, a).expect("enabled").successors.iter().map(|&(t, p)| p * v[t]).sum()
}

/// Value iteration from below over the states that can reach the target.
pub fn value_iteration(m: &Mdp, target: &[bool], positive: &[bool], init: &[f64]) -> Vec<f64> {
    let n = m.num_states();
    let mut v = init.to_vec();
    for _ in 0..VI_MAX_ITERATIONS {
        let mut delta: f64 = 0.0;
        for s in 0..n {
            if target[s] || !positive[s] {
                continue;
            }
            let best = m.enabled(s).map(|a| q_value(m, s, a, &v)).fold(0.0, f64::max);
            delta = delta.max((best - v[s]).abs());
            v[s] = best;
        }
        if delta < VI_TOLERANCE {
            break;
        }
    }
    v
}

/// Picks, among value-optimal actions, ones that make progress toward the
/// target, walking backward from it layer by layer. Ties go to the lowest
/// action index.
fn extract_policy(m: &Mdp, target: &[bool], v: &[f64]) -> PositionalPolicy {
    let n = m.num_states();
    let mut policy = m.first_action_policy();
    let optimal: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            let best = m.enabled(s).map(|a| q_value(m, s, a, v)).fold(f64::NEG_INFINITY, f64::max);
            m.enabled(s).filter(|&a| q_value(m, s, a, v) >= best - TIE_TOLERANCE).collect()
        })
        .collect();
    let mut attracted = target.to_vec();
    loop {
        let mut grew = Vec::new();
        for s in 0..n {
            if attracted[s] || v[s] <= 0.0 {
                continue;
            }
            if let Some(&a) =
                optimal[s].iter().find(|&&a| m.choice(s, a).expect("enabled").support().any(|t| attracted[t]))
            {
                policy.0[s] = a;
                grew.push(s);
            }
        }
        if grew.is_empty() {
            break;
        }
        for s in grew {
            attracted[s] = true;
        }
    }
    for s in 0..n {
        if !attracted[s] && v[s] > 0.0 {
            policy.0[s] = optimal[s][0];
        }
    }
    policy
}

/// Exact reachability probabilities of `target` under a fixed policy.
pub fn evaluate_reach(m: &Mdp, pi: &PositionalPolicy, target: &[bool]) -> Vec<f64> {
    let rows: Vec<Vec<(usize, f64)>> =
        (0..m.num_states()).map(|s| m.choice(s, pi.action(s)).expect("enabled").successors.clone()).collect();
    reach_probabilities(&rows, target)
}

/// Maximal probability of reaching `target` from every state, with a
/// positional policy attaining it.
///
/// Value-0 states are found by graph search first; value iteration from below
/// then produces near-optimal values, and a few rounds of exact policy
/// evaluation with strict improvement make the result exact.
pub fn max_reach_value(m: &Mdp, target: &[bool]) -> ReachResult {
    let n = m.num_states();
    let positive = prob_positive(m, target);
    let init: Vec<f64> = (0..n).map(|s| if target[s] { 1.0 } else { 0.0 }).collect();
    let v = value_iteration(m, target, &positive, &init);

    let mut policy = extract_policy(m, target, &v);
    let mut value = evaluate_reach(m, &policy, target);
    // Strict-improvement policy iteration; monotone for maximal reachability.
    for _ in 0..(n * m.max_enabled().max(1) + 1) {
        let mut improved = false;
        for s in 0..n {
            if target[s] || !positive[s] {
                continue;
            }
            let mut best = (value[s] + TIE_TOLERANCE, None);
            for a in m.enabled(s) {
                let q = q_value(m, s, a, &value);
                if q > best.0 {
                    best = (q, Some(a));
                }
            }
            if let Some(a) = best.1 {
                policy.0[s] = a;
                improved = true;
            }
        }
        if !improved {
            break;
        }
        value = evaluate_reach(m, &policy, target);
    }

    // Re-extract with the exact values so ties resolve to the lowest index.
    let canonical = extract_policy(m, target, &value);
    let canonical_value = evaluate_reach(m, &canonical, target);
    if canonical_value.iter().zip(&value).all(|(a, b)| *a >= b - 1e-10) {
        ReachResult { value: canonical_value, policy: canonical }
    } else {
        ReachResult { value, policy }
    }
}
