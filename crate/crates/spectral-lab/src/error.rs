use thiserror::Error;

/// Errors from spectral estimation and inference.
#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("series too short: {len} samples for segment length {segment}")]
    SeriesTooShort { len: usize, segment: usize },

    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },

    #[error("reference tone not found: {0}")]
    ToneNotFound(String),

    #[error("reference area must be > 0, got {0}")]
    NonPositiveReference(f64),

    #[error("band [{lo} Hz, {hi} Hz] is outside the PSD support [{min} Hz, {max} Hz]")]
    BandOutsideSupport { lo: f64, hi: f64, min: f64, max: f64 },

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed PSD file: {0}")]
    Malformed(String),

    #[error("serialization failure: {0}")]
    Serde(#[from] serde_json::Error),
}

impl SpectralError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        SpectralError::InvalidArgument {
            field,
            reason: reason.into(),
        }
    }
}
