//! Stochastic time-domain simulation of a feedback-cooled mechanical
//! oscillator read out by two noisy displacement sensors.
//!
//! The simulated plant is one or more damped harmonic modes driven by
//! thermal Langevin force. An in-loop sensor (white displacement noise
//! floor) feeds a derivative servo realized the way experiments build it:
//! the position signal is optionally band-passed around the controlled
//! mode, delayed by a quarter of its period, and scaled by `g·m·Γ·ω_m`, so
//! resonant motion receives the cold-damping force `−g·m·Γ·ẋ`. A second,
//! statistically independent out-of-loop sensor watches the same motion
//! and acts as the honest thermometer.
//!
//! Two integrators are provided: an exact one-step Gaussian update (no
//! timestep bias for the free oscillator; external forces zero-order held)
//! and a semi-implicit Euler scheme retained as an independent cross-check.
//! Every noise channel draws from its own counter-derived generator, so a
//! single seed reproduces the entire run and channels stay independent.
//!
//! Time series are generated sample by sample through [`Engine::step`];
//! short records can be captured whole via [`simulate`] and persisted with
//! [`write_record`].

pub mod config;
pub mod engine;
pub mod error;
pub mod feedback;
pub mod integrator;
pub mod noise;

mod io;

pub use config::{Integrator, SimulationConfig};
pub use engine::{simulate, Engine, SimulationRecord, StepSample, MAX_RECORD_SAMPLES};
pub use error::SimError;
pub use feedback::{Biquad, DelayLine, FeedbackLoop};
pub use integrator::{ExactGaussian, ModeState, SemiImplicitEuler};
pub use io::{read_config_sidecar, write_record};
pub use noise::{channel_rng, NoiseChannel};
