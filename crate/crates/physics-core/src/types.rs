//! Domain types: mechanical mode, thermal environment, transduction probes,
//! feedback loop settings, and the sinusoidal drive.

use serde::{Deserialize, Serialize};

use crate::convention::to_single_sided_hertz;
use crate::error::ModelError;

/// One mechanical mode of the resonator: the effective mass normalizes the
/// displacement coordinate so the standard harmonic-oscillator formulas hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanicalMode {
    pub label: String,
    /// Effective mass (kg).
    pub effective_mass: f64,
    /// Resonance angular frequency ω_m (rad/s).
    pub resonance: f64,
    /// Angular energy damping rate Γ (rad/s); FWHM of the displacement
    /// spectrum in angular units.
    pub damping: f64,
}

impl MechanicalMode {
    pub fn new(
        label: impl Into<String>,
        effective_mass: f64,
        resonance: f64,
        damping: f64,
    ) -> Result<Self, ModelError> {
        let mode = MechanicalMode {
            label: label.into(),
            effective_mass,
            resonance,
            damping,
        };
        mode.validate()?;
        Ok(mode)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.effective_mass > 0.0) || !self.effective_mass.is_finite() {
            return Err(ModelError::invalid(
                "effective_mass",
                format!("must be positive and finite, got {}", self.effective_mass),
            ));
        }
        if !(self.resonance > 0.0) || !self.resonance.is_finite() {
            return Err(ModelError::invalid(
                "resonance",
                format!("must be positive and finite, got {}", self.resonance),
            ));
        }
        if !(self.damping > 0.0) || !self.damping.is_finite() {
            return Err(ModelError::invalid(
                "damping",
                format!("must be positive and finite, got {}", self.damping),
            ));
        }
        // The quarter-cycle-delay feedback approximation needs a narrowband
        // (underdamped) resonance.
        if self.resonance / self.damping <= 1.0 {
            return Err(ModelError::invalid(
                "damping",
                format!(
                    "mode must be underdamped (resonance/damping > 1), got {}",
                    self.resonance / self.damping
                ),
            ));
        }
        Ok(())
    }

    /// Resonance frequency in Hz.
    pub fn frequency_hz(&self) -> f64 {
        self.resonance / (2.0 * std::f64::consts::PI)
    }

    /// Mechanical period 2π/ω_m (s).
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.resonance
    }

    /// Quality factor ω_m/Γ.
    pub fn quality_factor(&self) -> f64 {
        self.resonance / self.damping
    }
}

/// Thermal bath the oscillator equilibrates with. The fundamental constants
/// are compiled in (see [`crate::constants`]) and exposed here read-only so
/// they cannot drift between callers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    /// Bath temperature T₀ (K).
    pub bath_temperature: f64,
}

impl Environment {
    pub fn new(bath_temperature: f64) -> Result<Self, ModelError> {
        let env = Environment { bath_temperature };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.bath_temperature >= 0.0) || !self.bath_temperature.is_finite() {
            return Err(ModelError::invalid(
                "bath_temperature",
                format!("must be ≥ 0 and finite, got {}", self.bath_temperature),
            ));
        }
        Ok(())
    }

    /// Boltzmann constant k_B (J/K).
    pub fn boltzmann(&self) -> f64 {
        crate::constants::BOLTZMANN
    }

    /// Reduced Planck constant ħ (J·s).
    pub fn hbar(&self) -> f64 {
        crate::constants::HBAR
    }
}

/// One displacement transduction channel with a white noise floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeModel {
    /// Channel name, e.g. "in-loop" or "out-of-loop".
    pub label: String,
    /// White displacement-noise floor S_N, stored double-sided in angular
    /// frequency (m²·s).
    pub noise_floor: f64,
    /// Multiplicative calibration of the channel (ideal = 1).
    pub calibration_scale: f64,
}

impl ProbeModel {
    pub fn new(
        label: impl Into<String>,
        noise_floor: f64,
        calibration_scale: f64,
    ) -> Result<Self, ModelError> {
        let probe = ProbeModel {
            label: label.into(),
            noise_floor,
            calibration_scale,
        };
        probe.validate()?;
        Ok(probe)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.noise_floor >= 0.0) || !self.noise_floor.is_finite() {
            return Err(ModelError::invalid(
                "noise_floor",
                format!("must be ≥ 0 and finite, got {}", self.noise_floor),
            ));
        }
        if !(self.calibration_scale > 0.0) || !self.calibration_scale.is_finite() {
            return Err(ModelError::invalid(
                "calibration_scale",
                format!("must be positive and finite, got {}", self.calibration_scale),
            ));
        }
        Ok(())
    }

    /// Noise floor in the single-sided-hertz convention (m²/Hz).
    pub fn noise_floor_ss_hz(&self) -> f64 {
        to_single_sided_hertz(self.noise_floor)
    }
}

/// The two transduction channels. Their noise processes are statistically
/// independent: the in-loop channel feeds the servo, the out-of-loop channel
/// is the honest thermometer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbePair {
    pub inloop: ProbeModel,
    pub outloop: ProbeModel,
}

impl ProbePair {
    pub fn new(inloop: ProbeModel, outloop: ProbeModel) -> Self {
        ProbePair { inloop, outloop }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.inloop.validate()?;
        self.outloop.validate()
    }
}

/// Cold-damping loop settings. The dimensionless gain is defined so the
/// closed-loop damping is (1+g)Γ; the electronic loop coefficient g·m·Γ·ω_m
/// is derived internally from the controlled mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackConfig {
    /// Dimensionless gain g ≥ 0.
    pub gain: f64,
    /// Loop delay as a fraction of the mechanical period (nominal 0.25,
    /// which turns the position signal into a velocity signal).
    pub delay: f64,
    /// Band-pass center (rad/s); 0 selects the controlled mode's resonance.
    pub bandpass_center: f64,
    /// Band-pass full width (rad/s); 0 selects 20Γ of the controlled mode.
    pub bandpass_width: f64,
    pub enabled: bool,
}

impl FeedbackConfig {
    pub fn new(gain: f64, delay: f64) -> Result<Self, ModelError> {
        let fb = FeedbackConfig {
            gain,
            delay,
            bandpass_center: 0.0,
            bandpass_width: 0.0,
            enabled: true,
        };
        fb.validate()?;
        Ok(fb)
    }

    /// A disabled loop (gain 0).
    pub fn off() -> Self {
        FeedbackConfig {
            gain: 0.0,
            delay: 0.25,
            bandpass_center: 0.0,
            bandpass_width: 0.0,
            enabled: false,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.gain >= 0.0) || !self.gain.is_finite() {
            return Err(ModelError::invalid(
                "gain",
                format!("must be ≥ 0 and finite, got {}", self.gain),
            ));
        }
        if !(0.0..1.0).contains(&self.delay) {
            return Err(ModelError::invalid(
                "delay",
                format!("must satisfy 0 ≤ delay < 1 (period fraction), got {}", self.delay),
            ));
        }
        if self.bandpass_center < 0.0 || self.bandpass_width < 0.0 {
            return Err(ModelError::invalid(
                "bandpass",
                "center and width must be ≥ 0 (0 = automatic)",
            ));
        }
        Ok(())
    }
}

/// Sinusoidal gradient-force drive.
///
/// `force_per_volt` (κ) is the calibration of the actuation chain as read
/// back from a spectrum analyzer: driving at voltage V and inverting the
/// measured peak through [`crate::actuation::gradient_force_from_peak`]
/// reports κ·V. The corresponding time-domain force amplitude is κ·V/4 (see
/// [`DriveConfig::force_amplitude`]); the factor follows from that readout
/// formula evaluated on a resolution-bandwidth-normalized tone peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    /// Applied voltage (V_rms).
    pub voltage: f64,
    /// Actuation calibration κ (N/V) in the spectral-readout sense above.
    pub force_per_volt: f64,
    /// Drive angular frequency ω_d (rad/s).
    pub frequency: f64,
    /// Drive phase (rad).
    pub phase: f64,
}

impl DriveConfig {
    pub fn new(
        voltage: f64,
        force_per_volt: f64,
        frequency: f64,
        phase: f64,
    ) -> Result<Self, ModelError> {
        let drive = DriveConfig {
            voltage,
            force_per_volt,
            frequency,
            phase,
        };
        drive.validate()?;
        Ok(drive)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.voltage >= 0.0) || !self.voltage.is_finite() {
            return Err(ModelError::invalid(
                "voltage",
                format!("must be ≥ 0 and finite, got {}", self.voltage),
            ));
        }
        if !(self.force_per_volt >= 0.0) || !self.force_per_volt.is_finite() {
            return Err(ModelError::invalid(
                "force_per_volt",
                format!("must be ≥ 0 and finite, got {}", self.force_per_volt),
            ));
        }
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return Err(ModelError::invalid(
                "frequency",
                format!("must be positive and finite, got {}", self.frequency),
            ));
        }
        if !self.phase.is_finite() {
            return Err(ModelError::invalid("phase", "must be finite"));
        }
        Ok(())
    }

    /// Time-domain force amplitude (N): the force is
    /// `force_amplitude()·cos(ω_d t + φ)`.
    pub fn force_amplitude(&self) -> f64 {
        self.voltage * self.force_per_volt / 4.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_rejects_nonpositive_and_overdamped() {
        assert!(MechanicalMode::new("m", 0.0, 1.0, 0.1).is_err());
        assert!(MechanicalMode::new("m", 1e-12, -1.0, 0.1).is_err());
        assert!(MechanicalMode::new("m", 1e-12, 1.0, 0.0).is_err());
        // overdamped: resonance/damping ≤ 1
        assert!(MechanicalMode::new("m", 1e-12, 1.0, 2.0).is_err());
        assert!(MechanicalMode::new("m", 1e-12, 100.0, 1.0).is_ok());
    }

    #[test]
    fn environment_constants_are_fixed() {
        let env = Environment::new(300.0).unwrap();
        assert_eq!(env.boltzmann(), 1.380_649e-23);
        assert_eq!(env.hbar(), 1.054_572e-34);
        assert!(Environment::new(-1.0).is_err());
    }

    #[test]
    fn feedback_delay_range() {
        assert!(FeedbackConfig::new(1.0, 0.25).is_ok());
        assert!(FeedbackConfig::new(1.0, 1.0).is_err());
        assert!(FeedbackConfig::new(-0.5, 0.25).is_err());
        assert!(!FeedbackConfig::off().enabled);
    }

    #[test]
    fn drive_amplitude_mapping() {
        let d = DriveConfig::new(3.0, 0.133e-6, 2.0 * std::f64::consts::PI * 5.6e6, 0.0).unwrap();
        let a = d.force_amplitude();
        assert!((a - 0.25 * 3.0 * 0.133e-6).abs() < 1e-18);
    }

    #[test]
    fn probe_floor_conversion() {
        let p = ProbeModel::new("in-loop", 2.0e-30, 1.0).unwrap();
        assert_eq!(p.noise_floor_ss_hz(), 4.0e-30);
    }
}
