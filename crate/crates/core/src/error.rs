use thiserror::Error;

/// Errors raised by the completion library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("singular basis: Gram matrix condition number {condition:e} exceeds limit {limit:e}")]
    SingularBasis { condition: f64, limit: f64 },

    #[error("basis count {count} exceeds the dense Gram limit {limit}")]
    TooLarge { count: usize, limit: usize },

    #[error("matrix is zero")]
    ZeroMatrix,

    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("invalid confidence parameter beta = {0}; must be greater than 1")]
    InvalidConfidence(f64),

    #[error("sample set is empty")]
    EmptySample,

    #[error("partition error: {0}")]
    Partition(String),

    #[error("tangent space dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("infeasible constraints: {0}")]
    Infeasible(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
