use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("parameter out of range: {0}")]
    Parameter(String),
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative method failed to reach its target tolerance.
    #[error("numerical convergence failure: {0}")]
    Convergence(String),
    /// The requested mode is not supported by this operation.
    #[error("unsupported mode: {0}")]
    Unsupported(String),
    /// A problem instance exceeds a configured size cap.
    #[error("size limit exceeded: {0}")]
    Size(String),
    /// A threshold search found the predicate constant over the whole range.
    #[error("no threshold in search range: {0}")]
    NoThreshold(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
