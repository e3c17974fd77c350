//! Chain example: `n` states in a row, each offering a risky jump.
//!
//! Continue moves from state `s` to `s + 1` (the last state loops). Jump from
//! the `s`-th state (1-based) reaches an accepting sink with probability
//! `1/2^s` and a rejecting sink otherwise. Jumping immediately is optimal
//! with value 1/2.

use crate::acceptance::AcceptanceCondition;
use crate::mdp::Mdp;

pub const CONTINUE: usize = 0;
pub const JUMP: usize = 1;
/// State count used for the sample-size formulas (the sinks excluded).
pub const REPORTED_STATES: usize = 8;

pub fn accepting_sink(n: usize) -> usize {
    n
}

pub fn rejecting_sink(n: usize) -> usize {
    n + 1
}

pub fn mdp(n: usize) -> Mdp {
    assert!(n >= 1, "chain needs at least one state");
    let (acc, rej) = (accepting_sink(n), rejecting_sink(n));
    let mut m = Mdp::new(n + 2, 2, 0, AcceptanceCondition::buchi([acc]));
    let mut names: Vec<String> = (1..=n).map(|s| s.to_string()).collect();
    names.push("accept".into());
    names.push("reject".into());
    m.set_state_names(names);
    m.set_action_names(vec!["continue".into(), "jump".into()]);
    m.set_labels(acc, ["goal"]);
    for s in 0..n {
        m.add_transition(s, CONTINUE, (s + 1).min(n - 1), 1.0);
        let win = 0.5f64.powi(s as i32 + 1);
        m.add_transition(s, JUMP, acc, win);
        m.add_transition(s, JUMP, rej, 1.0 - win);
    }
    for sink in [acc, rej] {
        m.add_transition(sink, CONTINUE, sink, 1.0);
        m.add_transition(sink, JUMP, sink, 1.0);
    }
    m
}
