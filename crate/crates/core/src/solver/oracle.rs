use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::bsccs;
use crate::linalg::reach_probabilities;
use crate::mdp::{MarkovChain, Mdp, PositionalPolicy};

use super::SolveResult;

pub const ORACLE_POLICY_LIMIT: u64 = 1_000_000;

/// Satisfaction probability of `pi` from every state: the induced chain's
/// BSCCs are classified by the acceptance condition and the probability of
/// reaching a winning one is solved exactly.
pub fn policy_values(m: &Mdp, pi: &PositionalPolicy) -> Result<Vec<f64>> {
    Ok(chain_values(&m.induce_chain(pi)?))
}

/// Probability that the chain, started in each state, ends up in an
/// accepting BSCC.
pub fn chain_values(c: &MarkovChain) -> Vec<f64> {
    let mut winning = vec![false; c.num_states()];
    for b in bsccs(c) {
        if c.acceptance().accepts(&b) {
            for s in b {
                winning[s] = true;
            }
        }
    }
    reach_probabilities(c.rows(), &winning)
}

pub fn policy_satisfaction_probability(m: &Mdp, pi: &PositionalPolicy) -> Result<f64> {
    Ok(policy_values(m, pi)?[m.initial()])
}

/// Exhaustive optimum over every positional policy. The returned value vector
/// is the per-state maximum; the policy is the first one in enumeration order
/// (state 0 varies fastest) attaining the maximum at the initial state.
pub fn enumerate_policies_oracle(m: &Mdp) -> Result<SolveResult> {
    let n = m.num_states();
    let options: Vec<Vec<usize>> = (0..n).map(|s| m.enabled(s).collect()).collect();
    let mut count: u64 = 1;
    for o in &options {
        if o.is_empty() {
            return Err(Error::InvalidParameter("state without enabled action".into()));
        }
        count = count.saturating_mul(o.len() as u64);
        if count > ORACLE_POLICY_LIMIT {
            return Err(Error::SizeBound(format!("more than {ORACLE_POLICY_LIMIT} positional policies")));
        }
    }

    let mut digits = vec![0usize; n];
    let mut best = vec![f64::NEG_INFINITY; n];
    let mut best_policy = None;
    loop {
        let pi = PositionalPolicy((0..n).map(|s| options[s][digits[s]]).collect());
        let v = policy_values(m, &pi)?;
        if v[m.initial()] > best[m.initial()] + 1e-12 {
            best_policy = Some(pi.clone());
        }
        for s in 0..n {
            best[s] = best[s].max(v[s]);
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == n {
                let value = best;
                return Ok(SolveResult {
                    accepting_states: BTreeSet::new(),
                    value,
                    policy: best_policy.expect("at least one policy"),
                });
            }
            digits[i] += 1;
            if digits[i] < options[i].len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}
