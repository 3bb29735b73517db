use thiserror::Error;

/// Errors from configuration validation and simulation setup.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error(
        "unstable configuration: ω_m·dt = {omega_dt:.3} exceeds the semi-implicit \
         stability limit {limit:.3}; raise sample_rate or use the exact integrator"
    )]
    Unstable { omega_dt: f64, limit: f64 },

    #[error(
        "feedback delay of {requested_samples:.3} samples is shorter than one sample; \
         raise sample_rate"
    )]
    DelayTooShort { requested_samples: f64 },

    #[error("model error: {0}")]
    Model(#[from] physics_core::ModelError),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization failure: {0}")]
    Serde(#[from] serde_json::Error),
}

impl SimError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        SimError::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }
}
