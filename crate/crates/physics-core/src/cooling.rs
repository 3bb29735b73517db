//! Cooling law of the viscous feedback loop and the temperatures a
//! band-area thermometer infers from each probe.

use crate::constants::{BOLTZMANN, HBAR};

/// Which transduction channel a temperature was inferred from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopSide {
    InLoop,
    OutOfLoop,
}

/// Actual mode temperature under feedback: T = T₀·(1 + g²/snr)/(1 + g).
///
/// The 1/(1+g) is cold damping; the g²/snr term is the measurement noise the
/// loop feeds back onto the motion, which eventually re-heats it.
pub fn cooling_temperature(t0: f64, gain: f64, snr: f64) -> f64 {
    assert!(gain >= 0.0, "gain must be ≥ 0");
    assert!(snr > 0.0, "snr must be positive");
    t0 * (1.0 + gain * gain / snr) / (1.0 + gain)
}

/// Minimum achievable temperature and the gain reaching it:
/// T_min = 2·T₀·(√(1+snr) − 1)/snr at g_opt = √(1+snr) − 1.
pub fn min_temperature(t0: f64, snr: f64) -> (f64, f64) {
    assert!(snr > 0.0, "snr must be positive");
    let g_opt = (1.0 + snr).sqrt() - 1.0;
    let t_min = 2.0 * t0 * g_opt / snr;
    (t_min, g_opt)
}

/// Temperature a band-area thermometer reports from each channel.
///
/// The out-of-loop channel sees the true motion and returns
/// [`cooling_temperature`]. The in-loop channel's anti-correlated noise
/// subtracts apparent area, giving T₀·(1 − g(g+2)/snr)/(1+g): it crosses
/// zero exactly at the optimal gain and goes negative (unphysical) beyond —
/// squashing mistaken for cooling.
pub fn inferred_temperature_theory(side: LoopSide, t0: f64, gain: f64, snr: f64) -> f64 {
    assert!(gain >= 0.0, "gain must be ≥ 0");
    assert!(snr > 0.0, "snr must be positive");
    match side {
        LoopSide::OutOfLoop => cooling_temperature(t0, gain, snr),
        LoopSide::InLoop => t0 * (1.0 - gain * (gain + 2.0) / snr) / (1.0 + gain),
    }
}

/// Mean thermal phonon occupancy k_B·T/(ħ·ω_m) (classical limit).
pub fn phonon_occupancy(temperature: f64, omega_m: f64) -> f64 {
    assert!(temperature >= 0.0, "temperature must be ≥ 0");
    assert!(omega_m > 0.0, "omega_m must be positive");
    BOLTZMANN * temperature / (HBAR * omega_m)
}
