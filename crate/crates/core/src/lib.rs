//! Model-based PAC learning for omega-regular objectives in finite MDPs.
//!
//! The crate is organised bottom-up:
//!
//! * [`mdp`], [`graph`], [`acceptance`]: the MDP / Markov chain data model,
//!   SCC, BSCC and maximal-end-component decompositions.
//! * [`automata`]: LTL formulas (used as a semantic oracle on lasso words),
//!   deterministic omega-automata, product MDPs and policy lifting.
//! * [`solver`]: exact optimal satisfaction probabilities and positional
//!   policies for Büchi, parity and Rabin objectives.
//! * [`recurrence`]: epsilon-recurrence times, exact, sampled and bounded.
//! * [`learner`]: the optimistic-model learning loop, visit counts, the
//!   trajectory-based satisfaction estimator and the sample-size formulas.
//! * [`experiments`]: the gridworld, chain and two-state example generators and
//!   the CSV-producing experiment runner.

pub mod acceptance;
pub mod automata;
pub mod env;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod io;
pub mod learner;
pub mod linalg;
pub mod mdp;
pub mod random;
pub mod recurrence;
pub mod solver;

pub use acceptance::{AcceptanceCondition, StateMark};
pub use error::{Error, Result};
pub use mdp::{Choice, MarkovChain, Mdp, PositionalPolicy, Trajectory};

/// Seeded random stream used throughout the crate. ChaCha keeps streams
/// reproducible across platforms and releases.
pub type Rng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from a base seed.
pub fn derived_rng(seed: u64, index: u64) -> Rng {
    use rand::SeedableRng;
    let mut r = Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}
