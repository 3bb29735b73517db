//! `drive-sweep` command: gradient-force actuation calibration. Each
//! voltage gets one open-loop run with the resonant drive engaged; the
//! out-of-loop spectrum's peak amplitude density at each mode is read off,
//! and the driven mode's peak is inverted back into a force through the
//! resolution-bandwidth tone formula.

use crate::config::SimulationSpec;
use crate::seeds::derive_run_seed;
use langevin_sim::Engine;
use physics_core::gradient_force_from_peak;
use rayon::prelude::*;
use serde::Serialize;
use spectral_lab::{Psd, WelchAccumulator, Window};

/// One voltage point of the sweep.
#[derive(Debug, Clone, Serialize)]
pub struct DrivePoint {
    pub voltage_v: f64,
    /// Peak amplitude spectral density per mode (m/√Hz), config order.
    pub peak_asd_m_per_sqrt_hz: Vec<f64>,
    /// Force recovered from the driven mode's peak (N).
    pub inferred_force_n: f64,
}

/// Ordinary least squares of y on x.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DriveSweep {
    /// Index (config order) of the mode nearest the drive frequency.
    pub driven_mode: usize,
    pub points: Vec<DrivePoint>,
    /// Driven-mode peak ASD vs voltage; present with ≥ 2 distinct voltages.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asd_regression: Option<Regression>,
    /// Through-origin slope of inferred force vs voltage (N/V): the
    /// measured actuation calibration.
    pub force_per_volt_estimate: f64,
}

fn linear_regression(x: &[f64], y: &[f64]) -> Option<Regression> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some(Regression {
        slope,
        intercept,
        r_squared,
    })
}

fn outloop_psd(sim: &SimulationSpec, voltage: f64, seed: u64) -> anyhow::Result<Psd> {
    let config = sim.to_sim_config(0.0, Some(voltage), seed)?;
    let mut engine = Engine::new(&config)?;
    let mut welch =
        WelchAccumulator::new(sim.sample_rate_hz, sim.welch_segment, 0.5, Window::Hann)?;
    let n = config.n_samples();
    let skip = sim.warmup_samples();
    let mut buf = Vec::with_capacity(16_384);
    for i in 0..n {
        let s = engine.step();
        if i < skip {
            continue;
        }
        buf.push(s.y_outloop);
        if buf.len() == buf.capacity() {
            welch.push(&buf);
            buf.clear();
        }
    }
    welch.push(&buf);
    Ok(welch.finish()?)
}

/// Run the sweep. Needs the config's `drive` section (the κ calibration and
/// drive frequency); voltages may include 0 (thermal-only reference point).
pub fn run_drive_sweep(sim: &SimulationSpec, voltages: &[f64]) -> anyhow::Result<DriveSweep> {
    anyhow::ensure!(!voltages.is_empty(), "need at least one voltage");
    for &v in voltages {
        anyhow::ensure!(v >= 0.0 && v.is_finite(), "voltages must be ≥ 0, got {v}");
    }
    let drive = sim
        .drive
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("drive-sweep needs a `drive` config section with κ"))?;
    let modes = sim
        .modes
        .iter()
        .map(|m| m.to_mode())
        .collect::<anyhow::Result<Vec<_>>>()?;
    let driven_mode = modes
        .iter()
        .enumerate()
        .min_by(|a, b| {
            let da = (a.1.frequency_hz() - drive.frequency_hz).abs();
            let db = (b.1.frequency_hz() - drive.frequency_hz).abs();
            da.total_cmp(&db)
        })
        .map(|(i, _)| i)
        .unwrap();

    let spectra: Vec<Psd> = voltages
        .par_iter()
        .enumerate()
        .map(|(vi, &v)| outloop_psd(sim, v, derive_run_seed(sim.seed, vi, 0)))
        .collect::<anyhow::Result<Vec<_>>>()?;

    let mut points = Vec::with_capacity(voltages.len());
    for (&v, psd) in voltages.iter().zip(&spectra) {
        // Read each mode's peak from a window a few bins wide: enough to
        // catch an off-grid tone, narrow enough to exclude neighbours.
        let half = 3.0 * psd.bin_width();
        let asd: Vec<f64> = modes
            .iter()
            .map(|m| {
                let f = m.frequency_hz();
                psd.peak_in_band((f - half, f + half))
                    .map(|(_, s)| s.sqrt())
                    .unwrap_or(0.0)
            })
            .collect();
        let rbw_angular = 2.0 * std::f64::consts::PI * psd.rbw_hz;
        let force = gradient_force_from_peak(&modes[driven_mode], rbw_angular, asd[driven_mode]);
        points.push(DrivePoint {
            voltage_v: v,
            peak_asd_m_per_sqrt_hz: asd,
            inferred_force_n: force,
        });
    }

    let xs: Vec<f64> = points.iter().map(|p| p.voltage_v).collect();
    let ys: Vec<f64> = points
        .iter()
        .map(|p| p.peak_asd_m_per_sqrt_hz[driven_mode])
        .collect();
    let sum_v2: f64 = xs.iter().map(|v| v * v).sum();
    let force_per_volt_estimate = if sum_v2 > 0.0 {
        points
            .iter()
            .map(|p| p.inferred_force_n * p.voltage_v)
            .sum::<f64>()
            / sum_v2
    } else {
        0.0
    };
    Ok(DriveSweep {
        driven_mode,
        points,
        asd_regression: linear_regression(&xs, &ys),
        force_per_volt_estimate,
    })
}

/// The sweep table: voltage, one ASD column per mode, inferred force.
pub fn drive_csv(sweep: &DriveSweep, labels: &[String]) -> String {
    let mut out = String::from("voltage_V");
    for label in labels {
        out.push_str(&format!(",peak_asd_{label}_m_per_sqrt_hz"));
    }
    out.push_str(",inferred_force_N\n");
    for p in &sweep.points {
        out.push_str(&format!("{:.6e}", p.voltage_v));
        for a in &p.peak_asd_m_per_sqrt_hz {
            out.push_str(&format!(",{a:.6e}"));
        }
        out.push_str(&format!(",{:.6e}\n", p.inferred_force_n));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regression_recovers_an_exact_line() {
        let x = [0.5, 1.0, 1.5, 2.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 0.25).collect();
        let r = linear_regression(&x, &y).unwrap();
        assert!((r.slope - 3.0).abs() < 1e-12);
        assert!((r.intercept - 0.25).abs() < 1e-12);
        assert!((r.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regression_needs_two_distinct_points() {
        assert!(linear_regression(&[1.0], &[2.0]).is_none());
        assert!(linear_regression(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }

    #[test]
    fn csv_grows_one_asd_column_per_mode() {
        let sweep = DriveSweep {
            driven_mode: 0,
            points: vec![DrivePoint {
                voltage_v: 1.0,
                peak_asd_m_per_sqrt_hz: vec![1.0e-14, 2.0e-15],
                inferred_force_n: 1.0e-7,
            }],
            asd_regression: None,
            force_per_volt_estimate: 1.0e-7,
        };
        let csv = drive_csv(&sweep, &["a".into(), "b".into()]);
        let header = csv.lines().next().unwrap();
        assert_eq!(
            header,
            "voltage_V,peak_asd_a_m_per_sqrt_hz,peak_asd_b_m_per_sqrt_hz,inferred_force_N"
        );
        assert_eq!(csv.lines().count(), 2);
    }
}
