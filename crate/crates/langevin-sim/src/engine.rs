//! The streaming simulation loop.
//!
//! [`Engine`] advances one sample per call and hands back everything an
//! experimentalist could record at that instant: the true displacement, the
//! two noisy sensor readings, and the feedback force the servo will hold
//! over the next interval. Long runs should stream these samples straight
//! into an accumulator (Welch averager, running moments) instead of
//! collecting them; [`simulate`] exists for short in-memory records only.
//!
//! Per-step causal ordering:
//! 1. read the current true displacement (sum over modes),
//! 2. form both sensor samples by adding white measurement noise,
//! 3. feed the in-loop sample through the servo (optional mode-selection
//!    bandpass, quarter-period delay, gain) to get the feedback force,
//! 4. evaluate the coherent drive at the current time,
//! 5. hold the total external force constant while every mode advances one
//!    step.
//!
//! All randomness derives from the single configured seed through
//! independent per-channel generators, so runs are reproducible and adding
//! samples to one channel never perturbs another.

use crate::config::{Integrator, SimulationConfig};
use crate::error::SimError;
use crate::feedback::FeedbackLoop;
use crate::integrator::{ExactGaussian, ModeState, SemiImplicitEuler};
use crate::noise::{channel_rng, NoiseChannel};
use physics_core::BOLTZMANN;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// Every observable produced at one sample instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSample {
    /// Time of this sample (s).
    pub time: f64,
    /// True total displacement Σ_j x_j (m).
    pub x: f64,
    /// In-loop sensor reading (m).
    pub y_inloop: f64,
    /// Out-of-loop sensor reading (m).
    pub y_outloop: f64,
    /// Feedback force held over the next interval (N).
    pub feedback_force: f64,
}

/// An in-memory record of a short run, column per observable.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRecord {
    pub dt: f64,
    pub x: Vec<f64>,
    /// Per-mode displacement, outer index = mode.
    pub mode_displacements: Vec<Vec<f64>>,
    pub y_inloop: Vec<f64>,
    pub y_outloop: Vec<f64>,
    pub feedback_force: Vec<f64>,
}

/// Cap on [`simulate`] record length; longer runs must stream through
/// [`Engine::step`] to keep memory bounded.
pub const MAX_RECORD_SAMPLES: usize = 1 << 22;

enum Stepper {
    Exact(ExactGaussian),
    Euler(SemiImplicitEuler),
}

impl Stepper {
    fn advance(&self, state: ModeState, force: f64, rng: &mut ChaCha12Rng) -> ModeState {
        match self {
            Stepper::Exact(s) => {
                let z0: f64 = StandardNormal.sample(rng);
                let z1: f64 = StandardNormal.sample(rng);
                s.step(state, force, [z0, z1])
            }
            Stepper::Euler(s) => {
                let z: f64 = StandardNormal.sample(rng);
                s.step(state, force, z)
            }
        }
    }
}

/// Streaming simulator: construct once, call [`Engine::step`] repeatedly.
pub struct Engine {
    steppers: Vec<Stepper>,
    states: Vec<ModeState>,
    thermal_rngs: Vec<ChaCha12Rng>,
    inloop_rng: ChaCha12Rng,
    outloop_rng: ChaCha12Rng,
    feedback: FeedbackLoop,
    /// (amplitude N, angular frequency rad/s, phase rad)
    drive: Option<(f64, f64, f64)>,
    /// Standard deviation of each channel's per-sample noise (m).
    inloop_sigma: f64,
    outloop_sigma: f64,
    inloop_scale: f64,
    outloop_scale: f64,
    dt: f64,
    step_index: u64,
}

impl Engine {
    pub fn new(config: &SimulationConfig) -> Result<Self, SimError> {
        config.validate()?;
        let dt = config.dt();
        let temperature = config.env.bath_temperature;

        let steppers: Vec<Stepper> = config
            .modes
            .iter()
            .map(|m| match config.integrator {
                Integrator::ExactGaussian => Stepper::Exact(ExactGaussian::new(m, temperature, dt)),
                Integrator::SemiImplicitEuler => {
                    Stepper::Euler(SemiImplicitEuler::new(m, temperature, dt))
                }
            })
            .collect();

        // Start every mode in thermal equilibrium so there is no
        // equilibration transient for feedback-off observables. (Closed-loop
        // runs still need a warm-up of several damping times to reach the
        // cooled steady state.)
        let mut thermal_rngs: Vec<ChaCha12Rng> = (0..config.modes.len())
            .map(|j| channel_rng(config.seed, NoiseChannel::Thermal(j)))
            .collect();
        let states: Vec<ModeState> = config
            .modes
            .iter()
            .zip(thermal_rngs.iter_mut())
            .map(|(m, rng)| {
                let zx: f64 = StandardNormal.sample(rng);
                let zv: f64 = StandardNormal.sample(rng);
                let kt = BOLTZMANN * temperature;
                ModeState {
                    x: (kt / (m.effective_mass * m.resonance * m.resonance)).sqrt() * zx,
                    v: (kt / m.effective_mass).sqrt() * zv,
                }
            })
            .collect();

        let feedback = FeedbackLoop::new(
            &config.feedback,
            &config.modes[0],
            config.sample_rate,
            config.modes.len() > 1,
        )?;

        // A white displacement noise of double-sided angular-frequency
        // density S_N carries variance S_N·f_s once sampled at f_s.
        let inloop_sigma = (config.probes.inloop.noise_floor * config.sample_rate).sqrt();
        let outloop_sigma = (config.probes.outloop.noise_floor * config.sample_rate).sqrt();

        Ok(Engine {
            steppers,
            states,
            thermal_rngs,
            inloop_rng: channel_rng(config.seed, NoiseChannel::InloopSensor),
            outloop_rng: channel_rng(config.seed, NoiseChannel::OutloopSensor),
            feedback,
            drive: config
                .drive
                .as_ref()
                .map(|d| (d.force_amplitude(), d.frequency, d.phase)),
            inloop_sigma,
            outloop_sigma,
            inloop_scale: config.probes.inloop.calibration_scale,
            outloop_scale: config.probes.outloop.calibration_scale,
            dt,
            step_index: 0,
        })
    }

    /// Produce the observables at the current instant, then advance every
    /// mode one step under the force the servo and drive apply over it.
    pub fn step(&mut self) -> StepSample {
        let time = self.step_index as f64 * self.dt;
        let x: f64 = self.states.iter().map(|s| s.x).sum();

        let zi: f64 = StandardNormal.sample(&mut self.inloop_rng);
        let zo: f64 = StandardNormal.sample(&mut self.outloop_rng);
        let y_inloop = self.inloop_scale * (x + self.inloop_sigma * zi);
        let y_outloop = self.outloop_scale * (x + self.outloop_sigma * zo);

        let feedback_force = self.feedback.force_from_sample(y_inloop);
        let drive_force = match self.drive {
            Some((amp, omega, phase)) => amp * (omega * time + phase).cos(),
            None => 0.0,
        };
        // The actuator pushes on the whole structure: every mode feels the
        // same force, held constant across the step.
        let force = feedback_force + drive_force;
        for (state, (stepper, rng)) in self
            .states
            .iter_mut()
            .zip(self.steppers.iter().zip(self.thermal_rngs.iter_mut()))
        {
            *state = stepper.advance(*state, force, rng);
        }
        self.step_index += 1;

        StepSample {
            time,
            x,
            y_inloop,
            y_outloop,
            feedback_force,
        }
    }

    /// Displacement of one mode at the current instant (m).
    pub fn mode_displacement(&self, mode: usize) -> f64 {
        self.states[mode].x
    }

    /// Full state of one mode at the current instant.
    pub fn mode_state(&self, mode: usize) -> ModeState {
        self.states[mode]
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of steps taken so far.
    pub fn steps_taken(&self) -> u64 {
        self.step_index
    }
}

/// Run the configured duration and collect every observable in memory.
/// Refuses records beyond [`MAX_RECORD_SAMPLES`]; stream longer runs.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationRecord, SimError> {
    let mut engine = Engine::new(config)?;
    let n = config.n_samples();
    if n > MAX_RECORD_SAMPLES {
        return Err(SimError::invalid(
            "duration",
            format!(
                "{n} samples will not be collected in memory (limit {MAX_RECORD_SAMPLES}); \
                 stream through Engine::step instead"
            ),
        ));
    }
    let n_modes = config.modes.len();
    let mut record = SimulationRecord {
        dt: config.dt(),
        x: Vec::with_capacity(n),
        mode_displacements: vec![Vec::with_capacity(n); n_modes],
        y_inloop: Vec::with_capacity(n),
        y_outloop: Vec::with_capacity(n),
        feedback_force: Vec::with_capacity(n),
    };
    for _ in 0..n {
        for j in 0..n_modes {
            record.mode_displacements[j].push(engine.mode_displacement(j));
        }
        let s = engine.step();
        record.x.push(s.x);
        record.y_inloop.push(s.y_inloop);
        record.y_outloop.push(s.y_outloop);
        record.feedback_force.push(s.feedback_force);
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use physics_core::{Environment, FeedbackConfig, MechanicalMode, ProbeModel, ProbePair};
    use std::f64::consts::PI;

    fn base_config() -> SimulationConfig {
        SimulationConfig {
            modes: vec![
                MechanicalMode::new("m0", 1.0e-12, 2.0 * PI * 1.0e4, 2.0 * PI * 20.0).unwrap(),
            ],
            env: Environment::new(300.0).unwrap(),
            probes: ProbePair {
                inloop: ProbeModel::new("il", 1.0e-30, 1.0).unwrap(),
                outloop: ProbeModel::new("ol", 1.0e-30, 1.0).unwrap(),
            },
            feedback: FeedbackConfig::off(),
            drive: None,
            sample_rate: 2.5e5,
            duration: 0.1,
            seed: 11,
            integrator: Integrator::ExactGaussian,
        }
    }

    #[test]
    fn cold_silent_configuration_yields_identically_zero_records() {
        for integrator in [Integrator::ExactGaussian, Integrator::SemiImplicitEuler] {
            let mut cfg = base_config();
            cfg.env = Environment::new(0.0).unwrap();
            cfg.probes.inloop.noise_floor = 0.0;
            cfg.probes.outloop.noise_floor = 0.0;
            cfg.feedback = FeedbackConfig::new(2.0, 0.25).unwrap();
            cfg.integrator = integrator;
            let rec = simulate(&cfg).unwrap();
            assert!(rec.x.iter().all(|&v| v == 0.0));
            assert!(rec.y_inloop.iter().all(|&v| v == 0.0));
            assert!(rec.y_outloop.iter().all(|&v| v == 0.0));
            assert!(rec.feedback_force.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn repeated_runs_are_bitwise_identical() {
        let cfg = base_config();
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let mut cfg = base_config();
        let a = simulate(&cfg).unwrap();
        cfg.seed = 12;
        let b = simulate(&cfg).unwrap();
        assert_ne!(a.x, b.x);
    }

    #[test]
    fn disabled_feedback_reports_zero_force() {
        let rec = simulate(&base_config()).unwrap();
        assert!(rec.feedback_force.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn sensor_channels_see_the_same_displacement_with_different_noise() {
        let rec = simulate(&base_config()).unwrap();
        // Noise floors are equal, yet the two channels draw independently.
        assert_ne!(rec.y_inloop, rec.y_outloop);
        // With tiny noise floors the sensor tracks x closely.
        let sigma = (1.0e-30_f64 * 2.5e5).sqrt();
        let worst = rec
            .y_inloop
            .iter()
            .zip(&rec.x)
            .map(|(y, x)| (y - x).abs())
            .fold(0.0, f64::max);
        assert!(worst < 8.0 * sigma, "worst |y−x| = {worst:.3e}");
    }

    #[test]
    fn calibration_scale_multiplies_the_reading() {
        let mut cfg = base_config();
        cfg.probes.outloop.calibration_scale = 2.0;
        let rec = simulate(&cfg).unwrap();
        let reference = simulate(&base_config()).unwrap();
        // Same seed → same underlying draws; the miscalibrated channel reads
        // exactly twice the ideal one.
        for (a, b) in rec.y_outloop.iter().zip(&reference.y_outloop) {
            assert_eq!(*a, 2.0 * b);
        }
    }

    #[test]
    fn oversize_in_memory_records_are_refused() {
        let mut cfg = base_config();
        cfg.duration = 1.0e3; // 2.5e8 samples
        assert!(matches!(
            simulate(&cfg),
            Err(SimError::InvalidConfig { field: "duration", .. })
        ));
    }

    #[test]
    fn record_columns_share_length_and_modes() {
        let rec = simulate(&base_config()).unwrap();
        let n = rec.x.len();
        assert_eq!(n, 25_000);
        assert_eq!(rec.mode_displacements.len(), 1);
        assert_eq!(rec.mode_displacements[0].len(), n);
        assert_eq!(rec.y_inloop.len(), n);
        assert_eq!(rec.y_outloop.len(), n);
        assert_eq!(rec.feedback_force.len(), n);
        // Single mode: the total displacement is the mode displacement.
        assert_eq!(rec.x, rec.mode_displacements[0]);
    }
}
