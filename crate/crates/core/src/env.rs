//! Sampling access to an unknown environment.
//!
//! The learner only sees states as opaque ids, the actions enabled at each
//! visited state, sampled successors and the acceptance mark of each state.

use crate::acceptance::StateMark;
use crate::mdp::Mdp;

pub trait Environment {
    fn initial(&self) -> usize;
    /// Enabled actions in increasing order.
    fn enabled_actions(&self, s: usize) -> Vec<usize>;
    fn step(&self, s: usize, a: usize, rng: &mut crate::Rng) -> usize;
    fn mark(&self, s: usize) -> StateMark;
}

impl Environment for Mdp {
    fn initial(&self) -> usize {
        Mdp::initial(self)
    }

    fn enabled_actions(&self, s: usize) -> Vec<usize> {
        self.enabled(s).collect()
    }

    fn step(&self, s: usize, a: usize, rng: &mut crate::Rng) -> usize {
        self.choice(s, a).expect("action must be enabled").sample(rng)
    }

    fn mark(&self, s: usize) -> StateMark {
        self.acceptance().mark(s)
    }
}
