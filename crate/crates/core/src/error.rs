use thiserror::Error;

/// Errors raised by the exact-arithmetic routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("input too large: {0}")]
    TooLarge(String),

    #[error("resource cap exceeded: {what} needs {needed}, cap is {cap}")]
    ResourceCap { what: String, needed: u128, cap: u128 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("hypotheses violated: {}", .0.join(", "))]
    Hypotheses(Vec<String>),

    #[error("fine conductor ({cprime}, {cdouble}) is not admissible")]
    Inadmissible { cprime: u64, cdouble: u64 },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("search exhausted: {0}")]
    SearchExhausted(String),
}

pub type Result<T> = std::result::Result<T, Error>;
