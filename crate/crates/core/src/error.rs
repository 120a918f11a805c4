use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("{what}: search space {needed} exceeds budget {budget}")]
    Budget {
        what: &'static str,
        needed: String,
        budget: u128,
    },

    #[error("input length {len} exceeds capacity {capacity}")]
    Capacity { len: usize, capacity: usize },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("inner-code cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }
}
