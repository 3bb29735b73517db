//! `design` command: pure closed-form cooling curves, no simulation.
//! Tabulates the true mode temperature and the (eventually unphysical)
//! in-loop inference over a gain grid, and reports the optimum working
//! point for the configured measurement quality.

use physics_core::{
    cooling_temperature, inferred_temperature_theory, min_temperature, phonon_occupancy, LoopSide,
};
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DesignPoint {
    pub gain: f64,
    /// True mode temperature at this gain (K).
    pub temperature_k: f64,
    /// What an in-loop thermometer would report at this gain (K); goes
    /// negative past the squashing point.
    pub t_inloop_theory_k: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignSummary {
    pub bath_temperature_k: f64,
    pub snr: f64,
    /// Gain that minimizes the true temperature.
    pub optimal_gain: f64,
    /// Temperature at the optimal gain (K).
    pub min_temperature_k: f64,
    /// Mean phonon occupancy at the optimum, for the supplied mechanical
    /// frequency (absent when no frequency was given).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occupancy_at_min: Option<f64>,
    /// Frequency used for the occupancy (Hz).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occupancy_frequency_hz: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignReport {
    pub summary: DesignSummary,
    pub curve: Vec<DesignPoint>,
}

/// Evaluate the cooling design curve on a uniform gain grid [0, g_max].
///
/// `resonance_hz`, when given, converts the minimum temperature into a mean
/// phonon occupancy at that mechanical frequency.
pub fn run_design(
    t0: f64,
    snr: f64,
    g_max: f64,
    n_points: usize,
    resonance_hz: Option<f64>,
) -> anyhow::Result<DesignReport> {
    if !(t0 > 0.0) || !t0.is_finite() {
        anyhow::bail!("bath temperature must be positive, got {t0}");
    }
    if !(snr > 0.0) || !snr.is_finite() {
        anyhow::bail!("snr must be positive, got {snr}");
    }
    if !(g_max > 0.0) || !g_max.is_finite() {
        anyhow::bail!("maximum gain must be positive, got {g_max}");
    }
    if n_points < 2 {
        anyhow::bail!("need at least 2 grid points, got {n_points}");
    }
    let curve = (0..n_points)
        .map(|i| {
            let gain = g_max * i as f64 / (n_points - 1) as f64;
            DesignPoint {
                gain,
                temperature_k: cooling_temperature(t0, gain, snr),
                t_inloop_theory_k: inferred_temperature_theory(LoopSide::InLoop, t0, gain, snr),
            }
        })
        .collect();
    let (t_min, g_opt) = min_temperature(t0, snr);
    let occupancy = resonance_hz.map(|f| {
        let omega_m = 2.0 * std::f64::consts::PI * f;
        phonon_occupancy(t_min, omega_m)
    });
    Ok(DesignReport {
        summary: DesignSummary {
            bath_temperature_k: t0,
            snr,
            optimal_gain: g_opt,
            min_temperature_k: t_min,
            occupancy_at_min: occupancy,
            occupancy_frequency_hz: resonance_hz,
        },
        curve,
    })
}

/// Render the curve as CSV (no timestamps: reruns are byte-identical).
pub fn curve_csv(report: &DesignReport) -> String {
    let mut out = String::from("gain,T_K,T_inloop_theory_K\n");
    for p in &report.curve {
        out.push_str(&format!(
            "{:.6e},{:.6e},{:.6e}\n",
            p.gain, p.temperature_k, p.t_inloop_theory_k
        ));
    }
    out
}
