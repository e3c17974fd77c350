//! Objectives: LTL formulas, omega-automata, products and policy lifting.

pub mod automaton;
pub mod lift;
pub mod ltl;
pub mod product;

pub use automaton::{AcceptanceOn, OmegaAutomaton};
pub use lift::LiftedPolicy;
pub use ltl::{parse_ltl, Ltl};
pub use product::{ActionCodec, OnTheFlyProduct, ProductMdp};
