use thiserror::Error;

/// Errors raised by the optimizers, estimators and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("matrix is not positive-definite")]
    NotPositiveDefinite,

    #[error("preconditioner state: {0}")]
    State(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("unsupported problem size: {0}")]
    Capability(String),
}

pub type Result<T> = std::result::Result<T, Error>;
