use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("field error: {0}")]
    Field(String),

    #[error("enumeration budget exceeded: {needed} candidates, budget {budget}")]
    Budget { needed: u128, budget: u64 },

    #[error("degenerate norm: zero norm at a point where the objective is nonzero")]
    DegenerateNorm,

    #[error("invalid multi-norm specification: {0}")]
    Spec(String),

    #[error("decomposition is not hermitian: {0}")]
    Hermitian(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
