use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside the domain the operation is defined on.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("negative matrix entry at index {index} ({value})")]
    NegativeEntry { index: usize, value: f64 },

    #[error("dense materialization of size {size} exceeds cap {cap}")]
    DenseCapExceeded { size: usize, cap: usize },

    #[error("integer overflow computing {what}")]
    Overflow { what: &'static str },

    /// The witness construction has no admissible epsilon for this `s`.
    #[error("no valid epsilon for s = {s}: {reason}")]
    NoValidEpsilon { s: f64, reason: String },

    /// A numerically checked inequality that is proven to hold failed.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors that signal a violated mathematical guarantee rather
    /// than bad input.
    pub fn is_consistency_failure(&self) -> bool {
        matches!(self, Error::Consistency(_))
    }
}
