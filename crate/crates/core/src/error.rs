use thiserror::Error;

/// Errors produced by the mapping toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid pins: {0}")]
    InvalidPins(String),

    #[error("inconsistent model: {0}")]
    InconsistentModel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("external solver error: {0}")]
    ExternalSolver(String),

    #[error("routing incomplete: {unapplied:?} edges could not be applied")]
    RoutingIncomplete { unapplied: Vec<(usize, usize)> },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
}

pub type Result<T> = std::result::Result<T, Error>;
