//! Error type shared by the model's constructors and operations.

use thiserror::Error;

/// Validation or domain failure in the closed-form model.
#[derive(Debug, Error)]
pub enum ModelError {
    /// A constructor argument violated an invariant.
    #[error("invalid {field}: {reason}")]
    InvalidParameter {
        field: &'static str,
        reason: String,
    },
    /// A zero noise floor makes the signal-to-noise ratio infinite.
    #[error("noise floor is zero: signal-to-noise ratio is unbounded")]
    InfiniteSnr,
    /// Parallel lists that must be the same length were not.
    #[error("mismatched list lengths: {left} vs {right}")]
    MismatchedLengths { left: usize, right: usize },
}

impl ModelError {
    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ModelError::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
