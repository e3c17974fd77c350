//! Random models for property tests, benchmarks and the acceptance suite.

use rand::seq::index::sample;
use rand::Rng;

use crate::acceptance::AcceptanceCondition;
use crate::mdp::{MarkovChain, Mdp};

/// A random distribution over 1 to `max_support` distinct targets in
/// `0..n`, with weights drawn from `[0.1, 1]` before normalisation.
pub fn random_row<R: Rng + ?Sized>(rng: &mut R, n: usize, max_support: usize) -> Vec<(usize, f64)> {
    let k = rng.random_range(1..=max_support.min(n).max(1));
    let mut targets = sample(rng, n, k).into_vec();
    targets.sort_unstable();
    let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..=1.0)).collect();
    let total: f64 = weights.iter().sum();
    targets.into_iter().zip(weights).map(|(t, w)| (t, w / total)).collect()
}

/// Büchi, parity (priorities `0..=3`) or Rabin (one or two pairs), chosen
/// uniformly.
pub fn random_acceptance<R: Rng + ?Sized>(rng: &mut R, n: usize) -> AcceptanceCondition {
    let subset = |rng: &mut R, p: f64| -> Vec<usize> { (0..n).filter(|_| rng.random_bool(p)).collect() };
    match rng.random_range(0..3) {
        0 => AcceptanceCondition::buchi(subset(rng, 0.4)),
        1 => AcceptanceCondition::parity((0..n).map(|_| rng.random_range(0..=3)).collect()),
        _ => {
            let pairs = rng.random_range(1..=2);
            AcceptanceCondition::rabin((0..pairs).map(|_| (subset(rng, 0.3), subset(rng, 0.4))).collect())
        }
    }
}

/// A random chain with 1 to `max_states` states, initial state 0 and random
/// acceptance.
pub fn random_chain<R: Rng + ?Sized>(rng: &mut R, max_states: usize) -> MarkovChain {
    let n = rng.random_range(1..=max_states);
    let rows = (0..n).map(|_| random_row(rng, n, 3)).collect();
    let acc = random_acceptance(rng, n);
    MarkovChain::new(rows, 0, acc)
}

/// A random MDP with 1 to `max_states` states and up to `max_actions`
/// actions; every state enables at least one action.
pub fn random_mdp<R: Rng + ?Sized>(rng: &mut R, max_states: usize, max_actions: usize) -> Mdp {
    let n = rng.random_range(1..=max_states);
    let k = rng.random_range(1..=max_actions);
    let acc = random_acceptance(rng, n);
    let mut m = Mdp::new(n, k, 0, acc);
    for s in 0..n {
        let forced = rng.random_range(0..k);
        for a in 0..k {
            if a == forced || rng.random_bool(0.6) {
                for (t, p) in random_row(rng, n, 3) {
                    m.add_transition(s, a, t, p);
                }
            }
        }
    }
    m
}

/// Moves every positive entry of `row` by at most `alpha`, keeping it
/// positive, keeping zeros at zero and keeping the row sum.
pub fn perturb_row<R: Rng + ?Sized>(rng: &mut R, row: &[(usize, f64)], alpha: f64) -> Vec<(usize, f64)> {
    let positive: Vec<usize> = (0..row.len()).filter(|&i| row[i].1 > 0.0).collect();
    if positive.len() < 2 {
        return row.to_vec();
    }
    let mut d: Vec<f64> = positive.iter().map(|_| rng.random_range(-alpha / 2.0..=alpha / 2.0)).collect();
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    for x in &mut d {
        *x -= mean;
    }
    // shrink so every entry keeps at least half its mass
    let mut scale: f64 = 1.0;
    for (&i, &x) in positive.iter().zip(&d) {
        if x < 0.0 {
            scale = scale.min(row[i].1 / 2.0 / -x);
        }
    }
    let mut out = row.to_vec();
    for (&i, &x) in positive.iter().zip(&d) {
        out[i].1 += scale * x;
    }
    // put round-off back on the largest entry
    let total: f64 = out.iter().map(|e| e.1).sum();
    let big = positive.iter().copied().max_by(|&a, &b| out[a].1.total_cmp(&out[b].1)).expect("non-empty");
    out[big].1 += 1.0 - total;
    out
}

pub fn perturb_chain<R: Rng + ?Sized>(rng: &mut R, c: &MarkovChain, alpha: f64) -> MarkovChain {
    let rows = c.rows().iter().map(|r| perturb_row(rng, r, alpha)).collect();
    MarkovChain::new(rows, c.initial(), c.acceptance().clone())
}

pub fn perturb_mdp<R: Rng + ?Sized>(rng: &mut R, m: &Mdp, alpha: f64) -> Mdp {
    let mut out = Mdp::new(m.num_states(), m.num_actions(), m.initial(), m.acceptance().clone());
    for s in 0..m.num_states() {
        for c in m.choices(s) {
            for (t, p) in perturb_row(rng, &c.successors, alpha) {
                out.add_transition(s, c.action, t, p);
            }
        }
    }
    out
}
