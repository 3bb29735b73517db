//! Mechanical susceptibility of the open and closed loop.

use num_complex::Complex64;

use crate::types::MechanicalMode;

/// Complex mechanical susceptibility χ(ω) = [m(ω_m² − ω² − iΓω)]⁻¹ (m/N),
/// under the e^{-iωt} kernel: on resonance the response lags the force by a
/// quarter cycle, so χ(ω_m) = +i/(mΓω_m) (argument +π/2).
pub fn susceptibility(mode: &MechanicalMode, omega: f64) -> Complex64 {
    let denom = Complex64::new(
        mode.resonance * mode.resonance - omega * omega,
        -mode.damping * omega,
    ) * mode.effective_mass;
    denom.finv()
}

/// Susceptibility with the viscous loop closed: the feedback adds damping
/// g·Γ, giving χ_eff(ω) = [m(ω_m² − ω² − i(1+g)Γω)]⁻¹. At g = 0 this is
/// exactly [`susceptibility`].
pub fn closed_loop_susceptibility(mode: &MechanicalMode, gain: f64, omega: f64) -> Complex64 {
    let denom = Complex64::new(
        mode.resonance * mode.resonance - omega * omega,
        -(1.0 + gain) * mode.damping * omega,
    ) * mode.effective_mass;
    denom.finv()
}
