//! Closed-form frequency-domain model of a feedback-cooled mechanical
//! oscillator read out by two noisy displacement probes.
//!
//! Conventions, used by every downstream crate:
//!
//! - Internal spectral densities are **double-sided in angular frequency**
//!   (m²·s); displayed or exported values are single-sided per hertz,
//!   related by `S_ss(f) = 2 · S_ds(ω = 2πf)`. With this choice
//!   `(1/2π)·∫ S_ds dω` is the variance and every analytic identity in this
//!   crate closes exactly.
//! - Fourier kernel `e^{-iωt}`: time differentiation maps to `−iω`, which
//!   fixes the sign of the susceptibility's imaginary part and of the
//!   viscous-feedback term.

pub mod actuation;
pub mod constants;
pub mod convention;
pub mod cooling;
pub mod error;
pub mod numerics;
pub mod spectra;
pub mod susceptibility;
pub mod types;

pub use actuation::gradient_force_from_peak;
pub use constants::{BOLTZMANN, HBAR};
pub use convention::{to_double_sided_angular, to_single_sided_hertz, Sidedness};
pub use cooling::{
    cooling_temperature, inferred_temperature_theory, min_temperature, phonon_occupancy, LoopSide,
};
pub use error::ModelError;
pub use spectra::{
    driven_response, inloop_psd_theory, outloop_mechanical_psd_theory, outloop_psd_theory, snr,
    thermal_psd, zero_point_psd_peak,
};
pub use susceptibility::{closed_loop_susceptibility, susceptibility};
pub use types::{
    DriveConfig, Environment, FeedbackConfig, MechanicalMode, ProbeModel, ProbePair,
};
