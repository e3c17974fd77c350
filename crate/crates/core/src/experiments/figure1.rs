//! Two-state example: stay in `s0` forever.
//!
//! Action `a` loops at `s0`; action `b` moves to the absorbing `s1` with
//! probability `p`. The objective `G s0` is won with probability 1 by `a`,
//! but a learner only discovers that `b` is bad after seeing the rare
//! `s0 -b-> s1` transition.

use crate::acceptance::AcceptanceCondition;
use crate::automata::automaton::{globally, OmegaAutomaton};
use crate::mdp::Mdp;

pub const S0: usize = 0;
pub const S1: usize = 1;
pub const ACTION_A: usize = 0;
pub const ACTION_B: usize = 1;

/// The labelled MDP. Its own acceptance is Büchi on `s0`, which coincides
/// with `G s0` because `s1` is absorbing.
pub fn mdp(p: f64) -> Mdp {
    assert!(p > 0.0 && p <= 1.0, "p must lie in (0, 1]");
    let mut m = Mdp::new(2, 2, S0, AcceptanceCondition::buchi([S0]));
    m.set_state_names(vec!["s0".into(), "s1".into()]);
    m.set_action_names(vec!["a".into(), "b".into()]);
    m.set_labels(S0, ["s0"]);
    m.add_transition(S0, ACTION_A, S0, 1.0);
    if p < 1.0 {
        m.add_transition(S0, ACTION_B, S0, 1.0 - p);
    }
    m.add_transition(S0, ACTION_B, S1, p);
    m.add_transition(S1, ACTION_A, S1, 1.0);
    m.add_transition(S1, ACTION_B, S1, 1.0);
    m
}

/// Deterministic Büchi automaton for `G s0`.
pub fn automaton() -> OmegaAutomaton {
    globally("s0")
}
