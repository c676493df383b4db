use alloc::string::String;

/// Errors raised by domains, oracles and solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("vertex enumeration refused: about {estimate} vertices exceeds cap {cap}")]
    EnumerationCap { estimate: f64, cap: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invariant violated: {name}: {detail}")]
    Invariant { name: &'static str, detail: String },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invariant(name: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant {
            name,
            detail: detail.into(),
        }
    }
}
