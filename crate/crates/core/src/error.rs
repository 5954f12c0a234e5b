use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("hyperplane contains no integral points")]
    NoIntegralPoints,

    #[error("points not in general position")]
    NotGeneralPosition,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("too many primes: {count} primes exceed the limit of {limit}; lower the prime bound or raise the limit")]
    TooManyPrimes { count: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
