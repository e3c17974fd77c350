//! Running a positional product policy on the original MDP, with the
//! automaton state carried as memory.

use rand::Rng;

use crate::automata::automaton::OmegaAutomaton;
use crate::automata::product::ProductMdp;
use crate::mdp::{Mdp, PositionalPolicy};

/// A finite-memory policy on the original MDP obtained from a positional
/// policy on the product.
#[derive(Clone, Debug)]
pub struct LiftedPolicy<'a> {
    product: &'a ProductMdp,
    aut: &'a OmegaAutomaton,
    policy: PositionalPolicy,
}

impl<'a> LiftedPolicy<'a> {
    pub fn new(product: &'a ProductMdp, aut: &'a OmegaAutomaton, policy: PositionalPolicy) -> Self {
        LiftedPolicy { product, aut, policy }
    }

    pub fn initial_memory(&self) -> usize {
        self.aut.initial()
    }

    /// MDP action and next memory at state `s` with memory `q`. `None` if
    /// `(s, q)` is not a reachable product state.
    pub fn decide(&self, m: &Mdp, s: usize, q: usize) -> Option<(usize, usize)> {
        let i = self.product.index_of(s, q)?;
        let letter = self.aut.letter(m.labels(s).iter()).ok()?;
        match self.product.codec().decode(self.policy.action(i)) {
            (a, Some(q2)) => Some((a, q2)),
            (a, None) => Some((a, self.aut.step(q, letter))),
        }
    }

    /// Runs the policy for `length` steps on `m` and returns the visited
    /// `(state, memory)` pairs.
    pub fn simulate<R: Rng + ?Sized>(&self, m: &Mdp, length: usize, rng: &mut R) -> Vec<(usize, usize)> {
        let mut s = m.initial();
        let mut q = self.initial_memory();
        let mut out = vec![(s, q)];
        for _ in 0..length {
            let (a, q2) = self.decide(m, s, q).expect("lifted policy stays inside the product");
            s = m.choice(s, a).expect("product actions are enabled in the MDP").sample(rng);
            q = q2;
            out.push((s, q));
        }
        out
    }
}
