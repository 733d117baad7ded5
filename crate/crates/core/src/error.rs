use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("empty polytope: {0}")]
    EmptyPolytope(String),
    #[error("quasi-sure support of size {support} exceeds the enumeration cap {cap}")]
    EnumerationCapExceeded { support: usize, cap: usize },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("bound violated: {0}")]
    BoundViolated(String),
    #[error("no-arbitrage condition violated: {0}")]
    NaViolated(String),
    #[error("martingale polytope of market {0} is empty")]
    EmptyMartingalePolytope(usize),
    /// An exact identity that must hold by construction did not. Always a bug.
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors that signal a broken invariant rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_) | Error::BoundViolated(_))
    }
}
