//! Displacement spectral densities of the open- and closed-loop oscillator,
//! all in the internal double-sided angular convention (m²·s).

use num_complex::Complex64;

use crate::constants::{BOLTZMANN, HBAR};
use crate::error::ModelError;
use crate::susceptibility::{closed_loop_susceptibility, susceptibility};
use crate::types::{Environment, MechanicalMode, ProbeModel, ProbePair};

/// Thermal (Brownian) displacement spectrum S_x(ω) = 2·k_B·T·Γ·m·|χ(ω)|².
/// Its peak is 2k_BT/(mΓω_m²) and `(1/2π)·∫ S_x dω = k_BT/(mω_m²)`
/// (equipartition), which is what pins the double-sided angular convention.
pub fn thermal_psd(mode: &MechanicalMode, env: &Environment, omega: f64) -> f64 {
    let chi = susceptibility(mode, omega);
    2.0 * BOLTZMANN * env.bath_temperature * mode.damping * mode.effective_mass * chi.norm_sqr()
}

/// Peak spectral density of zero-point motion, ħ/(m·Γ·ω_m) (m²·s).
pub fn zero_point_psd_peak(mode: &MechanicalMode) -> f64 {
    HBAR / (mode.effective_mass * mode.damping * mode.resonance)
}

/// Signal-to-noise ratio of the in-loop channel: thermal peak density over
/// the channel's noise floor, S_x(ω_m)/S_N, both double-sided angular.
pub fn snr(
    mode: &MechanicalMode,
    env: &Environment,
    inloop_noise: &ProbeModel,
) -> Result<f64, ModelError> {
    if inloop_noise.noise_floor == 0.0 {
        return Err(ModelError::InfiniteSnr);
    }
    Ok(thermal_psd(mode, env, mode.resonance) / inloop_noise.noise_floor)
}

/// Mechanical part of the out-of-loop spectrum: the closed-loop response to
/// the thermal force plus the in-loop noise the servo imprints on the motion,
/// |χ_eff|²·(2k_BT₀mΓ + g²m²Γ²ω²·S_N^IL). Excludes the out-of-loop channel's
/// own floor; integrating this and normalizing by its g = 0 value yields the
/// cooling law (1 + g²/SNR)/(1+g) exactly.
pub fn outloop_mechanical_psd_theory(
    mode: &MechanicalMode,
    env: &Environment,
    gain: f64,
    inloop_floor: f64,
    omega: f64,
) -> f64 {
    let chi_eff = closed_loop_susceptibility(mode, gain, omega);
    let m = mode.effective_mass;
    let g2 = gain * gain;
    let force_psd = 2.0 * BOLTZMANN * env.bath_temperature * m * mode.damping
        + g2 * m * m * mode.damping * mode.damping * omega * omega * inloop_floor;
    chi_eff.norm_sqr() * force_psd
}

/// Full out-of-loop spectrum: mechanical part plus the independent
/// out-of-loop noise floor.
pub fn outloop_psd_theory(
    mode: &MechanicalMode,
    env: &Environment,
    gain: f64,
    probes: &ProbePair,
    omega: f64,
) -> f64 {
    outloop_mechanical_psd_theory(mode, env, gain, probes.inloop.noise_floor, omega)
        + probes.outloop.noise_floor
}

/// In-loop measured spectrum
/// S_IL(ω) = |χ_eff|²·2k_BT₀mΓ + |χ_eff/χ|²·S_N^IL.
///
/// The second term is *not* an additive floor: because the servo feeds the
/// measured noise back onto the motion, the in-loop noise appears filtered by
/// χ_eff/χ and is anti-correlated with the motion near resonance. At ω_m,
/// S_IL = [S_x,0(ω_m) + S_N]/(1+g)² — the peak "squashes" below the floor at
/// high gain even though the true temperature is no longer dropping.
pub fn inloop_psd_theory(
    mode: &MechanicalMode,
    env: &Environment,
    gain: f64,
    inloop_probe: &ProbeModel,
    omega: f64,
) -> f64 {
    let chi_eff = closed_loop_susceptibility(mode, gain, omega);
    let m = mode.effective_mass;
    let thermal_force = 2.0 * BOLTZMANN * env.bath_temperature * m * mode.damping;
    // |χ_eff/χ|² = |χ_eff|²·|χ⁻¹|², with |χ⁻¹|² = m²[(ω_m²−ω²)² + Γ²ω²].
    let detune = mode.resonance * mode.resonance - omega * omega;
    let inv_chi_sqr =
        m * m * (detune * detune + mode.damping * mode.damping * omega * omega);
    chi_eff.norm_sqr() * (thermal_force + inv_chi_sqr * inloop_probe.noise_floor)
}

/// Coherent multi-mode driven response |Σ_j χ_j(ω)·F_j·e^{iφ_j}|² (m²):
/// between resonances the cross terms produce interference dips or
/// asymmetries whenever the per-mode drive phases differ.
pub fn driven_response(
    modes: &[MechanicalMode],
    per_mode_forces: &[(f64, f64)],
    omega: f64,
) -> Result<f64, ModelError> {
    if modes.len() != per_mode_forces.len() {
        return Err(ModelError::MismatchedLengths {
            left: modes.len(),
            right: per_mode_forces.len(),
        });
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for (mode, &(amplitude, phase)) in modes.iter().zip(per_mode_forces) {
        sum += susceptibility(mode, omega) * Complex64::from_polar(amplitude, phase);
    }
    Ok(sum.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn desk_mode() -> MechanicalMode {
        MechanicalMode::new("desk", 1.0e-12, 2.0 * PI * 1.0e4, 2.0 * PI * 20.0).unwrap()
    }

    #[test]
    fn thermal_psd_vanishes_at_zero_temperature() {
        let mode = desk_mode();
        let env = Environment::new(0.0).unwrap();
        for k in 1..10 {
            assert_eq!(thermal_psd(&mode, &env, mode.resonance * k as f64 / 5.0), 0.0);
        }
    }

    #[test]
    fn thermal_peak_identity() {
        let mode = desk_mode();
        let env = Environment::new(300.0).unwrap();
        let peak = thermal_psd(&mode, &env, mode.resonance);
        let expected = 2.0 * BOLTZMANN * 300.0
            / (mode.effective_mass * mode.damping * mode.resonance * mode.resonance);
        assert!((peak - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn zero_point_peak_scales_inversely_with_mass() {
        let mode = desk_mode();
        let mut heavy = mode.clone();
        heavy.effective_mass *= 2.0;
        assert!(
            (zero_point_psd_peak(&heavy) - 0.5 * zero_point_psd_peak(&mode)).abs()
                < 1e-30 * zero_point_psd_peak(&mode)
        );
    }

    #[test]
    fn snr_basics() {
        let mode = desk_mode();
        let env = Environment::new(300.0).unwrap();
        let peak = thermal_psd(&mode, &env, mode.resonance);
        let probe = ProbeModel::new("in-loop", peak, 1.0).unwrap();
        assert!((snr(&mode, &env, &probe).unwrap() - 1.0).abs() < 1e-12);

        let halved = ProbeModel::new("in-loop", peak / 2.0, 1.0).unwrap();
        assert!((snr(&mode, &env, &halved).unwrap() - 2.0).abs() < 1e-12);

        let zero = ProbeModel::new("in-loop", 0.0, 1.0).unwrap();
        assert!(matches!(snr(&mode, &env, &zero), Err(ModelError::InfiniteSnr)));
    }

    #[test]
    fn outloop_reduces_to_thermal_plus_floor_at_zero_gain() {
        let mode = desk_mode();
        let env = Environment::new(300.0).unwrap();
        let peak = thermal_psd(&mode, &env, mode.resonance);
        let probes = ProbePair::new(
            ProbeModel::new("in-loop", peak / 100.0, 1.0).unwrap(),
            ProbeModel::new("out-of-loop", peak / 100.0, 1.0).unwrap(),
        );
        for k in 0..40 {
            let w = mode.resonance * (0.5 + 0.025 * k as f64);
            let s = outloop_psd_theory(&mode, &env, 0.0, &probes, w);
            let expected = thermal_psd(&mode, &env, w) + probes.outloop.noise_floor;
            assert!((s - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn inloop_reduces_to_thermal_plus_floor_at_zero_gain() {
        let mode = desk_mode();
        let env = Environment::new(300.0).unwrap();
        let peak = thermal_psd(&mode, &env, mode.resonance);
        let probe = ProbeModel::new("in-loop", peak / 100.0, 1.0).unwrap();
        for k in 0..40 {
            let w = mode.resonance * (0.5 + 0.025 * k as f64);
            let s = inloop_psd_theory(&mode, &env, 0.0, &probe, w);
            let expected = thermal_psd(&mode, &env, w) + probe.noise_floor;
            assert!((s - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn inloop_peak_squash_identity() {
        // S_IL(ω_m)·(1+g)² = S_x,0(ω_m) + S_N for every gain.
        let mode = desk_mode();
        let env = Environment::new(300.0).unwrap();
        let peak = thermal_psd(&mode, &env, mode.resonance);
        let probe = ProbeModel::new("in-loop", peak / 100.0, 1.0).unwrap();
        for &g in &[0.0, 0.3, 1.0, 5.0, 9.05, 16.0, 32.0, 250.0] {
            let lhs = inloop_psd_theory(&mode, &env, g, &probe, mode.resonance)
                * (1.0 + g)
                * (1.0 + g);
            let rhs = peak + probe.noise_floor;
            assert!((lhs - rhs).abs() <= 1e-12 * rhs, "gain {g}");
        }
    }

    #[test]
    fn squashing_onset_matches_optimal_gain() {
        // S_IL(ω_m) < S_N exactly when g > √(1+SNR) − 1.
        let mode = desk_mode();
        let env = Environment::new(300.0).unwrap();
        let peak = thermal_psd(&mode, &env, mode.resonance);
        let probe = ProbeModel::new("in-loop", peak / 100.0, 1.0).unwrap();
        let snr_value = 100.0_f64;
        let g_star = (1.0 + snr_value).sqrt() - 1.0;
        for &(g, below) in &[
            (g_star * 0.98, false),
            (g_star * 1.02, true),
            (2.0 * g_star, true),
            (1.0, false),
        ] {
            let s = inloop_psd_theory(&mode, &env, g, &probe, mode.resonance);
            assert_eq!(s < probe.noise_floor, below, "gain {g}");
        }
    }

    #[test]
    fn noiseless_inloop_limit_is_pure_cold_damping() {
        // With S_N = 0 the mechanical spectrum integrates to T0/(1+g): check
        // the pointwise form reduces to |χ_eff|² times the thermal force.
        let mode = desk_mode();
        let env = Environment::new(300.0).unwrap();
        let probe = ProbeModel::new("in-loop", 0.0, 1.0).unwrap();
        let g = 12.0;
        for k in 1..30 {
            let w = mode.resonance * (0.7 + 0.02 * k as f64);
            let s = inloop_psd_theory(&mode, &env, g, &probe, w);
            let expected = outloop_mechanical_psd_theory(&mode, &env, g, 0.0, w);
            assert!((s - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn driven_response_single_mode_and_cancellation() {
        let mode = desk_mode();
        let w = mode.resonance * 0.98;
        let single = driven_response(std::slice::from_ref(&mode), &[(2.0e-12, 0.4)], w).unwrap();
        let chi = susceptibility(&mode, w).norm_sqr();
        assert!((single - chi * (2.0e-12f64).powi(2)).abs() <= 1e-12 * single);

        // Two identical modes driven in antiphase cancel everywhere.
        let modes = vec![mode.clone(), mode.clone()];
        for k in 1..20 {
            let w = mode.resonance * 0.1 * k as f64;
            let s = driven_response(&modes, &[(1e-12, 0.0), (1e-12, PI)], w).unwrap();
            let scale = driven_response(&modes[..1], &[(1e-12, 0.0)], w).unwrap();
            assert!(s <= 1e-24 * scale);
        }
    }

    #[test]
    fn driven_response_rejects_mismatched_lists() {
        let mode = desk_mode();
        assert!(matches!(
            driven_response(&[mode], &[], 1.0),
            Err(ModelError::MismatchedLengths { .. })
        ));
    }
}
