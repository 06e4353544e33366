//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any part of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Tensor operands (or a model and an input) disagree on shape.
    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    /// A file did not conform to its declared format.
    #[error("format error: {0}")]
    Format(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// The screened pool is too small to draw the requested subset.
    #[error("insufficient pool: requested {requested} examples but only {available} are correctly classified by all models")]
    InsufficientPool { requested: usize, available: usize },

    /// Artifacts from different configurations were mixed.
    #[error("fingerprint mismatch for {what}: expected {expected}, found {actual}")]
    FingerprintMismatch {
        what: String,
        expected: String,
        actual: String,
    },

    /// The run configuration is incomplete or inconsistent.
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
