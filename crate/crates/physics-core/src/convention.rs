//! Spectral-density bookkeeping: one internal convention, one display
//! convention, and the exact rule connecting them.
//!
//! Internally every density is double-sided in angular frequency (m²·s), so
//! the variance is `(1/2π)·∫ S_ds(ω) dω` over the whole real line. Display
//! and file output use single-sided per-hertz densities (m²/Hz), where the
//! variance is `∫₀^∞ S_ss(f) df`. For a real stationary process the two are
//! related pointwise by `S_ss(f) = 2·S_ds(ω = 2πf)`: the factor 2 folds the
//! negative frequencies, and the ω = 2πf substitution's Jacobian cancels
//! against the 1/2π of the angular-frequency variance rule.

use serde::{Deserialize, Serialize};

/// Which convention a spectral density is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sidedness {
    /// Double-sided density over angular frequency (m²·s).
    DoubleSidedAngular,
    /// Single-sided density over frequency in hertz (m²/Hz).
    SingleSidedHertz,
}

/// Convert a double-sided angular density (m²·s) to single-sided per hertz
/// (m²/Hz), evaluated at the same physical frequency.
pub fn to_single_sided_hertz(s_ds_angular: f64) -> f64 {
    2.0 * s_ds_angular
}

/// Convert a single-sided per-hertz density (m²/Hz) to double-sided angular
/// (m²·s), evaluated at the same physical frequency.
pub fn to_double_sided_angular(s_ss_hertz: f64) -> f64 {
    s_ss_hertz / 2.0
}
