//! Example models and the experiment runner.

pub mod chain;
pub mod figure1;
pub mod gridworld;
pub mod runner;
