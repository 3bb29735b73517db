//! Physical constants.

/// Boltzmann constant k_B (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Reduced Planck constant ħ (J·s).
pub const HBAR: f64 = 1.054_572e-34;
