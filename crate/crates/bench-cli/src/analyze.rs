//! `analyze` command: fit a saved PSD to a sum of Brownian Lorentzians plus
//! a white floor and emit a machine-readable report next to a model CSV on
//! the same frequency grid, so the fit can be overlaid on the data — or fed
//! straight back in as a fixed-point check.

use crate::config::AnalyzeSpec;
use physics_core::{Environment, BOLTZMANN};
use serde::Serialize;
use spectral_lab::{fit_spectrum, read_psd_csv, ModeGuess, Psd, SpectrumFit, SpectrumGuess};
use std::path::Path;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Fit report in bench units (Hz, kg, m²/Hz), one entry per fitted mode.
#[derive(Debug, Clone, Serialize)]
pub struct ModeReport {
    pub mass_kg: f64,
    pub mass_err_kg: f64,
    pub linewidth_hz: f64,
    pub linewidth_err_hz: f64,
    pub resonance_hz: f64,
    pub resonance_err_hz: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub converged: bool,
    pub iterations: usize,
    pub residual_norm: f64,
    pub assumed_temperature_k: f64,
    pub noise_floor_m2_per_hz: f64,
    pub noise_floor_err_m2_per_hz: f64,
    /// √floor: the displacement sensitivity (m/√Hz).
    pub sensitivity_m_per_sqrt_hz: f64,
    pub modes: Vec<ModeReport>,
}

impl FitReport {
    pub fn from_fit(fit: &SpectrumFit) -> FitReport {
        FitReport {
            converged: fit.converged,
            iterations: fit.iterations,
            residual_norm: fit.residual_norm,
            assumed_temperature_k: fit.assumed_temperature,
            noise_floor_m2_per_hz: fit.noise_floor,
            noise_floor_err_m2_per_hz: fit.noise_floor_err,
            sensitivity_m_per_sqrt_hz: fit.noise_floor.max(0.0).sqrt(),
            modes: fit
                .modes
                .iter()
                .map(|m| ModeReport {
                    mass_kg: m.mass,
                    mass_err_kg: m.mass_err,
                    linewidth_hz: m.damping / TWO_PI,
                    linewidth_err_hz: m.damping_err / TWO_PI,
                    resonance_hz: m.resonance / TWO_PI,
                    resonance_err_hz: m.resonance_err / TWO_PI,
                })
                .collect(),
        }
    }
}

/// The fitted model evaluated on a hertz grid (single-sided density).
pub fn model_psd(fit: &SpectrumFit, grid: &Psd) -> Result<Psd, spectral_lab::SpectralError> {
    let values: Vec<f64> = grid
        .frequency_hz
        .iter()
        .map(|f| {
            let w = TWO_PI * f;
            let w2 = w * w;
            let mut s = fit.noise_floor;
            for m in &fit.modes {
                let det = m.resonance * m.resonance - w2;
                let d = det * det + m.damping * m.damping * w2;
                s += 4.0 * BOLTZMANN * fit.assumed_temperature * m.damping / (m.mass * d);
            }
            s
        })
        .collect();
    Psd::new(
        grid.frequency_hz.clone(),
        values,
        grid.rbw_hz,
        grid.window,
        grid.segments_averaged,
    )
}

pub struct AnalyzeOutcome {
    pub fit: SpectrumFit,
    pub report: FitReport,
    /// Model on the fitted grid, ready to write next to the report.
    pub model: Psd,
}

/// Load a PSD, restrict to the requested band, fit, and package the report.
/// IO/parse problems surface as errors; a completed-but-unconverged fit is
/// returned with `fit.converged == false` for the caller's exit-code logic.
pub fn run_analyze(psd_path: &Path, spec: &AnalyzeSpec) -> anyhow::Result<AnalyzeOutcome> {
    let (full, _sidecar) = read_psd_csv(psd_path)
        .map_err(|e| anyhow::anyhow!("cannot load PSD {}: {e}", psd_path.display()))?;
    let psd = match spec.band_hz {
        Some(band) => full
            .restricted(band)
            .map_err(|e| anyhow::anyhow!("band ({}, {}) Hz: {e}", band.0, band.1))?,
        None => full,
    };
    let env = Environment::new(spec.assumed_temperature_k)?;
    let guess = SpectrumGuess {
        modes: spec
            .modes
            .iter()
            .map(|m| ModeGuess {
                mass: m.mass_kg,
                damping: TWO_PI * m.linewidth_hz,
                resonance: TWO_PI * m.resonance_hz,
            })
            .collect(),
        noise_floor: spec.noise_floor_guess_m2_per_hz,
    };
    let fit = fit_spectrum(&psd, guess.modes.len(), &env, &guess)?;
    let report = FitReport::from_fit(&fit);
    let model = model_psd(&fit, &psd)?;
    Ok(AnalyzeOutcome { fit, report, model })
}

#[cfg(test)]
mod tests {
    use super::*;
    use spectral_lab::{FittedMode, Window};

    fn toy_fit() -> SpectrumFit {
        SpectrumFit {
            modes: vec![FittedMode {
                mass: 1.0e-12,
                damping: TWO_PI * 20.0,
                resonance: TWO_PI * 1.0e4,
                mass_err: 1.0e-14,
                damping_err: TWO_PI * 0.2,
                resonance_err: TWO_PI * 1.0,
            }],
            noise_floor: 4.0e-26,
            noise_floor_err: 1.0e-28,
            assumed_temperature: 300.0,
            residual_norm: 0.1,
            converged: true,
            iterations: 9,
        }
    }

    #[test]
    fn report_converts_angular_rates_to_hertz() {
        let report = FitReport::from_fit(&toy_fit());
        assert!((report.modes[0].linewidth_hz - 20.0).abs() < 1e-12);
        assert!((report.modes[0].resonance_hz - 1.0e4).abs() < 1e-9);
        assert!((report.sensitivity_m_per_sqrt_hz - 2.0e-13).abs() < 1e-20);
    }

    #[test]
    fn model_peaks_at_the_fitted_resonance() {
        let fit = toy_fit();
        let df = 2.0;
        let grid = Psd::new(
            (4500..5500).map(|i| i as f64 * df).collect(),
            vec![1.0e-26; 1000],
            1.5 * df,
            Window::Hann,
            1,
        )
        .unwrap();
        let model = model_psd(&fit, &grid).unwrap();
        let (f_peak, peak) = model
            .frequency_hz
            .iter()
            .zip(&model.values)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(f, v)| (*f, *v))
            .unwrap();
        assert!((f_peak - 1.0e4).abs() <= df);
        // Peak density ≈ 4 k_B T/(m Γ ω_m²) + floor.
        let expected = 4.0 * BOLTZMANN * 300.0
            / (1.0e-12 * (TWO_PI * 20.0) * (TWO_PI * 1.0e4).powi(2))
            + 4.0e-26;
        assert!((peak - expected).abs() < 0.02 * expected, "{peak} vs {expected}");
    }
}
