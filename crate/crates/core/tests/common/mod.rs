#![allow(dead_code)]

use omega_pac::{AcceptanceCondition, Mdp, PositionalPolicy};

pub fn all_policies(m: &Mdp) -> Vec<PositionalPolicy> {
    let mut out = vec![Vec::new()];
    for s in 0..m.num_states() {
        out = out.into_iter().flat_map(|p: Vec<usize>| m.enabled(s).map(move |a| [p.clone(), vec![a]].concat())).collect();
    }
    out.into_iter().map(PositionalPolicy).collect()
}

/// Probability of visiting `target` within `steps` transitions from every
/// state, by backward induction over the step count.
pub fn reach_within(rows: &[Vec<(usize, f64)>], target: usize, steps: usize) -> Vec<f64> {
    let n = rows.len();
    let mut v: Vec<f64> = (0..n).map(|s| if s == target { 1.0 } else { 0.0 }).collect();
    for _ in 0..steps {
        v = (0..n).map(|s| if s == target { 1.0 } else { rows[s].iter().map(|&(t, p)| p * v[t]).sum() }).collect();
    }
    v
}

/// `m` with the pairs in `unknown` redirected to a fresh winning sink, which
/// gets index `m.num_states()`.
pub fn with_sink(m: &Mdp, unknown: &[(usize, usize)]) -> Mdp {
    let n = m.num_states();
    let marks: Vec<_> = (0..n).map(|s| m.acceptance().mark(s)).collect();
    let base = AcceptanceCondition::from_marks(&marks).unwrap();
    let mut all: Vec<_> = marks.iter().cloned().map(|x| base.extend_for_sink(x)).collect();
    all.push(base.winning_sink_mark());
    let mut out = Mdp::new(n + 1, m.num_actions(), m.initial(), AcceptanceCondition::from_marks(&all).unwrap());
    for s in 0..n {
        for c in m.choices(s) {
            if unknown.contains(&(s, c.action)) {
                out.add_transition(s, c.action, n, 1.0);
            } else {
                for &(t, p) in &c.successors {
                    out.add_transition(s, c.action, t, p);
                }
            }
        }
    }
    out.add_transition(n, 0, n, 1.0);
    out
}
