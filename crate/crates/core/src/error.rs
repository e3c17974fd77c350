use thiserror::Error;

use crate::mdp::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {}", format_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("policy selects action {action} which is not enabled at state {state}")]
    DisabledAction { state: usize, action: usize },

    #[error("policy covers {got} states but the model has {expected}")]
    PolicyLength { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("size bound exceeded: {0}")]
    SizeBound(String),

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown atomic proposition `{0}`")]
    UnknownProposition(String),

    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    #[error("{context}: {message}")]
    Format { context: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
