use crate::error::SimError;
use physics_core::{DriveConfig, Environment, FeedbackConfig, MechanicalMode, ProbePair};
use serde::{Deserialize, Serialize};

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Exact one-step mean/covariance of the linear stochastic oscillator;
    /// external forces held constant over each step. No timestep bias for
    /// the free oscillator.
    ExactGaussian,
    /// Symplectic (semi-implicit) Euler; kept as an independent cross-check
    /// of the exact update.
    SemiImplicitEuler,
}

/// Everything a run needs. The seed fully determines all noise draws.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Simulated modes; the first is the one the feedback loop controls.
    pub modes: Vec<MechanicalMode>,
    pub env: Environment,
    pub probes: ProbePair,
    pub feedback: FeedbackConfig,
    pub drive: Option<DriveConfig>,
    /// Samples per second.
    pub sample_rate: f64,
    /// Seconds of data to generate.
    pub duration: f64,
    pub seed: u64,
    pub integrator: Integrator,
}

/// Minimum number of samples a run must produce.
pub const MIN_SAMPLES: u64 = 1 << 14;

/// Required oversampling of the fastest mode.
pub const MIN_SAMPLES_PER_CYCLE: f64 = 20.0;

/// Semi-implicit Euler keeps |eigenvalues| ≤ 1 for ω·dt up to 2; reject
/// with margin before that.
pub const STABILITY_LIMIT_OMEGA_DT: f64 = 1.9;

/// Minimum samples per quarter period of the controlled mode, so the
/// rounded integer delay stays within a few percent of a cycle.
pub const MIN_QUARTER_PERIOD_SAMPLES: f64 = 4.0;

impl SimulationConfig {
    /// Check every structural invariant; `simulate` and `Engine::new` call
    /// this first.
    pub fn validate(&self) -> Result<(), SimError> {
        if self.modes.is_empty() {
            return Err(SimError::invalid("modes", "need at least one mode"));
        }
        for m in &self.modes {
            m.validate()?;
        }
        self.env.validate()?;
        self.probes.inloop.validate()?;
        self.probes.outloop.validate()?;
        self.feedback.validate()?;
        if !(self.sample_rate > 0.0) || !self.sample_rate.is_finite() {
            return Err(SimError::invalid(
                "sample_rate",
                "must be finite and positive",
            ));
        }
        let dt = 1.0 / self.sample_rate;

        // Stability is checked before the oversampling rule so that a grossly
        // under-sampled semi-implicit configuration reports the physical
        // problem, not just the policy violation.
        if self.integrator == Integrator::SemiImplicitEuler {
            for m in &self.modes {
                let omega_dt = m.resonance * dt;
                if omega_dt >= STABILITY_LIMIT_OMEGA_DT {
                    return Err(SimError::Unstable {
                        omega_dt,
                        limit: STABILITY_LIMIT_OMEGA_DT,
                    });
                }
            }
        }

        let f_max = self
            .modes
            .iter()
            .map(|m| m.frequency_hz())
            .fold(0.0, f64::max);
        if self.sample_rate < MIN_SAMPLES_PER_CYCLE * f_max {
            return Err(SimError::invalid(
                "sample_rate",
                format!(
                    "{} Hz under-samples the fastest mode at {f_max} Hz; need ≥ {} Hz",
                    self.sample_rate,
                    MIN_SAMPLES_PER_CYCLE * f_max
                ),
            ));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(SimError::invalid("duration", "must be finite and positive"));
        }
        let n = (self.duration * self.sample_rate).round() as u64;
        if n < MIN_SAMPLES {
            return Err(SimError::invalid(
                "duration",
                format!("{n} samples is below the minimum record of {MIN_SAMPLES}"),
            ));
        }

        if self.feedback.enabled {
            let controlled = &self.modes[0];
            let quarter_samples = 0.25 * controlled.period() * self.sample_rate;
            if quarter_samples < MIN_QUARTER_PERIOD_SAMPLES {
                return Err(SimError::invalid(
                    "sample_rate",
                    format!(
                        "quarter period of the controlled mode spans {quarter_samples:.2} \
                         samples; need ≥ {MIN_QUARTER_PERIOD_SAMPLES}"
                    ),
                ));
            }
            let delay_samples = self.feedback.delay * controlled.period() * self.sample_rate;
            if self.feedback.gain != 0.0 && delay_samples.round() < 1.0 {
                return Err(SimError::DelayTooShort {
                    requested_samples: delay_samples,
                });
            }
        }

        if let Some(drive) = &self.drive {
            drive.validate()?;
            if drive.frequency / (2.0 * std::f64::consts::PI) > self.sample_rate / 2.0 {
                return Err(SimError::invalid(
                    "drive",
                    "drive frequency exceeds the Nyquist rate",
                ));
            }
        }
        Ok(())
    }

    /// Time step in seconds.
    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    /// Number of samples the run will produce.
    pub fn n_samples(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }
}
