//! The bench configuration document: one JSON file per invocation, every
//! physical quantity in SI units with a unit-suffixed key name, unknown
//! keys rejected. `examples-config/config.schema.json` describes the same
//! structure for editors and tooling.

use langevin_sim::{Integrator, SimulationConfig};
use physics_core::{
    to_double_sided_angular, DriveConfig, Environment, FeedbackConfig, MechanicalMode, ProbeModel,
    ProbePair,
};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Top-level config document. Commands require the section they use:
/// `design`, `cooling-sweep`, and `drive-sweep` read `simulation`;
/// `analyze` reads `analyze`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analyze: Option<AnalyzeSpec>,
}

/// One mechanical mode, in bench units (Hz, kg).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub label: String,
    pub mass_kg: f64,
    /// Resonance frequency f_m (Hz).
    pub resonance_hz: f64,
    /// Full energy-decay linewidth Γ/2π (Hz).
    pub linewidth_hz: f64,
}

/// Sinusoidal gradient-force drive; the voltage comes per sweep point.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    /// Actuation calibration κ (N/V) in the spectral-readout sense: a drive
    /// at V volts inverts to a reported force κ·V.
    pub force_per_volt_n: f64,
    pub frequency_hz: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

/// Everything a simulated run needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub bath_temperature_k: f64,
    /// First mode is the one the feedback loop controls.
    pub modes: Vec<ModeSpec>,
    /// White in-loop sensor floor, single-sided (m²/Hz).
    pub inloop_noise_m2_per_hz: f64,
    /// White out-of-loop sensor floor, single-sided (m²/Hz).
    pub outloop_noise_m2_per_hz: f64,
    pub sample_rate_hz: f64,
    /// Seconds of data analyzed per run (after the warm-up is discarded).
    pub duration_s: f64,
    /// Leading seconds discarded before any spectral analysis.
    #[serde(default)]
    pub warmup_s: f64,
    /// Feedback delay as a fraction of the controlled mode's period.
    #[serde(default = "default_delay_fraction")]
    pub delay_fraction: f64,
    /// Welch segment length in samples (power of two).
    pub welch_segment: usize,
    pub integrator: Integrator,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveSpec>,
    /// Master seed; per-run seeds are derived from it deterministically.
    pub seed: u64,
}

fn default_delay_fraction() -> f64 {
    0.25
}

impl BenchConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let body = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let cfg: BenchConfig = serde_json::from_str(&body)
            .map_err(|e| anyhow::anyhow!("config {} does not parse: {e}", path.display()))?;
        if let Some(sim) = &cfg.simulation {
            sim.validate()?;
        }
        if let Some(an) = &cfg.analyze {
            an.validate()?;
        }
        Ok(cfg)
    }

    pub fn simulation(&self) -> anyhow::Result<&SimulationSpec> {
        self.simulation
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("this command needs a `simulation` config section"))
    }

    pub fn analyze_spec(&self) -> anyhow::Result<&AnalyzeSpec> {
        self.analyze
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("this command needs an `analyze` config section"))
    }
}

impl ModeSpec {
    pub fn to_mode(&self) -> anyhow::Result<MechanicalMode> {
        Ok(MechanicalMode::new(
            self.label.clone(),
            self.mass_kg,
            2.0 * std::f64::consts::PI * self.resonance_hz,
            2.0 * std::f64::consts::PI * self.linewidth_hz,
        )?)
    }
}

impl SimulationSpec {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.modes.is_empty() {
            anyhow::bail!("simulation.modes must contain at least one mode");
        }
        for m in &self.modes {
            m.to_mode()?;
        }
        for (name, v) in [
            ("bath_temperature_k", self.bath_temperature_k),
            ("inloop_noise_m2_per_hz", self.inloop_noise_m2_per_hz),
            ("outloop_noise_m2_per_hz", self.outloop_noise_m2_per_hz),
            ("warmup_s", self.warmup_s),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                anyhow::bail!("simulation.{name} must be ≥ 0 and finite, got {v}");
            }
        }
        for (name, v) in [
            ("sample_rate_hz", self.sample_rate_hz),
            ("duration_s", self.duration_s),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                anyhow::bail!("simulation.{name} must be positive and finite, got {v}");
            }
        }
        if !(0.0..1.0).contains(&self.delay_fraction) {
            anyhow::bail!(
                "simulation.delay_fraction must lie in [0, 1), got {}",
                self.delay_fraction
            );
        }
        if self.welch_segment < 4 || !self.welch_segment.is_power_of_two() {
            anyhow::bail!(
                "simulation.welch_segment must be a power of two ≥ 4, got {}",
                self.welch_segment
            );
        }
        let analyzed = (self.duration_s * self.sample_rate_hz) as usize;
        if self.welch_segment > analyzed {
            anyhow::bail!(
                "simulation.welch_segment ({}) exceeds the analyzed record ({} samples)",
                self.welch_segment,
                analyzed
            );
        }
        // Structural constraints (oversampling, stability, delay
        // granularity) are enforced by the simulator's own validation.
        self.to_sim_config(0.0, None, self.seed)?.validate()?;
        Ok(())
    }

    pub fn environment(&self) -> Environment {
        Environment {
            bath_temperature: self.bath_temperature_k,
        }
    }

    pub fn controlled_mode(&self) -> anyhow::Result<MechanicalMode> {
        self.modes[0].to_mode()
    }

    /// In-loop floor in the internal double-sided angular convention.
    pub fn inloop_floor_internal(&self) -> f64 {
        to_double_sided_angular(self.inloop_noise_m2_per_hz)
    }

    pub fn outloop_floor_internal(&self) -> f64 {
        to_double_sided_angular(self.outloop_noise_m2_per_hz)
    }

    /// Resolve one runnable simulation at the given feedback gain and seed;
    /// `voltage` engages the configured drive at that amplitude.
    pub fn to_sim_config(
        &self,
        gain: f64,
        voltage: Option<f64>,
        seed: u64,
    ) -> anyhow::Result<SimulationConfig> {
        let modes = self
            .modes
            .iter()
            .map(|m| m.to_mode())
            .collect::<anyhow::Result<Vec<_>>>()?;
        let feedback = if gain > 0.0 {
            FeedbackConfig::new(gain, self.delay_fraction)?
        } else {
            FeedbackConfig::off()
        };
        let drive = match voltage {
            None => None,
            Some(v) => {
                let spec = self.drive.as_ref().ok_or_else(|| {
                    anyhow::anyhow!(
                        "drive requested at {v} V but the config has no `drive` section \
                         (force calibration κ missing)"
                    )
                })?;
                Some(DriveConfig::new(
                    v,
                    spec.force_per_volt_n,
                    2.0 * std::f64::consts::PI * spec.frequency_hz,
                    spec.phase_rad,
                )?)
            }
        };
        Ok(SimulationConfig {
            modes,
            env: self.environment(),
            probes: ProbePair {
                inloop: ProbeModel::new("in-loop", self.inloop_floor_internal(), 1.0)?,
                outloop: ProbeModel::new("out-of-loop", self.outloop_floor_internal(), 1.0)?,
            },
            feedback,
            drive,
            sample_rate: self.sample_rate_hz,
            duration: self.warmup_s + self.duration_s,
            seed,
            integrator: self.integrator,
        })
    }

    /// Samples discarded at the head of every run.
    pub fn warmup_samples(&self) -> usize {
        (self.warmup_s * self.sample_rate_hz).round() as usize
    }
}

/// Inputs for `analyze`: the model order, initial guesses, and the band.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSpec {
    /// Temperature the displacement scale is anchored to (the fit holds it
    /// fixed and extracts masses).
    pub assumed_temperature_k: f64,
    /// Optional fit band (Hz); the whole file is fitted when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_hz: Option<(f64, f64)>,
    /// Initial guess for the white floor (m²/Hz, single-sided).
    pub noise_floor_guess_m2_per_hz: f64,
    /// Initial guesses, one per fitted mode.
    pub modes: Vec<ModeSpec>,
}

impl AnalyzeSpec {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.modes.is_empty() {
            anyhow::bail!("analyze.modes must contain at least one guess");
        }
        if !(self.assumed_temperature_k > 0.0) || !self.assumed_temperature_k.is_finite() {
            anyhow::bail!("analyze.assumed_temperature_k must be positive");
        }
        if !(self.noise_floor_guess_m2_per_hz > 0.0) {
            anyhow::bail!("analyze.noise_floor_guess_m2_per_hz must be positive");
        }
        if let Some((lo, hi)) = self.band_hz {
            if !(lo >= 0.0 && hi > lo) {
                anyhow::bail!("analyze.band_hz must satisfy 0 ≤ lo < hi, got ({lo}, {hi})");
            }
        }
        for m in &self.modes {
            m.to_mode()?;
        }
        Ok(())
    }
}
