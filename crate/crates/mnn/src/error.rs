//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Configuration that violates a structural precondition (grid sizes,
    /// level counts, layer shapes).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Operand shapes do not match.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A numeric quantity that must be finite was not.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// An iterative solver failed to converge within its budget.
    #[error("solver failed: {0}")]
    Solver(String),

    /// Rejection sampling ran out of attempts.
    #[error("sampling exhausted: {0}")]
    SamplingExhausted(String),

    /// Serialization / file format problems.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
