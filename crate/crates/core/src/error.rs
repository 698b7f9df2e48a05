use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degree {n} outside supported range 1..={max}")]
    DegreeOutOfRange { n: usize, max: usize },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("operation requires a non-empty family")]
    EmptyFamily,

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid partial permutation: {0}")]
    InvalidPartialPerm(String),

    #[error("member of size {size} exceeds the allowed maximum {max}")]
    MemberTooLarge { size: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("work budget exceeded: spent {spent} of {limit} units")]
    BudgetExceeded { spent: u64, limit: u64 },

    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
