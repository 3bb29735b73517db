//! `cooling-sweep` command: Monte-Carlo gain sweep with both thermometers.
//!
//! For every requested gain the sweep runs one or more independently seeded
//! simulations, streams the two sensor channels through Welch estimators,
//! seed-averages the spectra, and infers a temperature from each channel
//! against the gain-zero reference. Theory columns come from the closed
//! forms, never from the simulation, so the comparison stays honest.

use crate::config::SimulationSpec;
use crate::seeds::derive_run_seed;
use langevin_sim::Engine;
use physics_core::{cooling_temperature, inferred_temperature_theory, snr, LoopSide, ProbeModel};
use rayon::prelude::*;
use serde::Serialize;
use spectral_lab::{infer_temperature, Psd, WelchAccumulator, Window};

/// One row of the sweep table. Temperatures are in kelvin; the in-loop
/// value is signed (noise squashing drives it below zero at high gain).
#[derive(Debug, Clone, Serialize)]
pub struct CoolingPoint {
    pub gain: f64,
    pub t_outloop_k: f64,
    pub t_inloop_k: f64,
    pub t_theory_outloop_k: f64,
    pub t_theory_inloop_k: f64,
    /// Set when the in-loop band area stops being a temperature.
    pub unphysical: bool,
    /// Measured in-loop density near the resonance (m²/Hz), for squashing
    /// diagnostics.
    pub inloop_peak_m2_per_hz: f64,
    /// The same density rescaled by (1+g)²; the loop identity pins this to
    /// the gain-zero value at every gain.
    pub scaled_inloop_peak_m2_per_hz: f64,
}

/// Seed-averaged spectra for one gain.
#[derive(Debug, Clone)]
pub struct GainSpectra {
    pub gain: f64,
    pub inloop: Psd,
    pub outloop: Psd,
}

#[derive(Debug, Clone)]
pub struct CoolingSweep {
    /// Thermal-peak-to-floor ratio of the in-loop probe at zero gain.
    pub snr: f64,
    pub points: Vec<CoolingPoint>,
    pub spectra: Vec<GainSpectra>,
}

/// Samples handed to the Welch estimators per engine drain.
const STREAM_CHUNK: usize = 16_384;

/// Temperature-band half-widths, in units of the closed-loop linewidth
/// (1+g)Γ/2π. The out-of-loop band follows the ten-linewidth guidance; the
/// in-loop band is kept narrow because its signed excess is weak at high
/// gain and wide bands only add floor-subtraction noise. Both the excess
/// and the reference share the closed-loop Lorentzian shape, so the capture
/// fraction cancels between a gain-g band and the gain-zero reference band
/// as long as the multiple is the same on both sides.
const OUTLOOP_BAND_HALF_LINEWIDTHS: f64 = 5.0;
const INLOOP_BAND_HALF_LINEWIDTHS: f64 = 0.75;

/// Half-width (fraction of a closed-loop linewidth) of the window averaged
/// to read the spectral density "at" the resonance.
const PEAK_WINDOW_FRACTION: f64 = 0.05;

fn band(center_hz: f64, half_width_hz: f64) -> (f64, f64) {
    (center_hz - half_width_hz, center_hz + half_width_hz)
}

/// Mean density over a window around the resonance whose width scales with
/// the closed-loop linewidth but never drops below two bins.
fn peak_density(psd: &Psd, center_hz: f64, closed_loop_linewidth_hz: f64) -> f64 {
    let half = (PEAK_WINDOW_FRACTION * closed_loop_linewidth_hz).max(2.0 * psd.bin_width());
    let range = psd.band_indices(band(center_hz, half));
    let n = range.len().max(1);
    psd.values[range].iter().sum::<f64>() / n as f64
}

fn run_single(sim: &SimulationSpec, gain: f64, seed: u64) -> anyhow::Result<(Psd, Psd)> {
    let config = sim.to_sim_config(gain, None, seed)?;
    let mut engine = Engine::new(&config)?;
    let mut inloop =
        WelchAccumulator::new(sim.sample_rate_hz, sim.welch_segment, 0.5, Window::Hann)?;
    let mut outloop =
        WelchAccumulator::new(sim.sample_rate_hz, sim.welch_segment, 0.5, Window::Hann)?;
    let n = config.n_samples();
    let skip = sim.warmup_samples();
    let mut buf_il = Vec::with_capacity(STREAM_CHUNK);
    let mut buf_ol = Vec::with_capacity(STREAM_CHUNK);
    for i in 0..n {
        let s = engine.step();
        if i < skip {
            continue;
        }
        buf_il.push(s.y_inloop);
        buf_ol.push(s.y_outloop);
        if buf_il.len() == STREAM_CHUNK {
            inloop.push(&buf_il);
            outloop.push(&buf_ol);
            buf_il.clear();
            buf_ol.clear();
        }
    }
    inloop.push(&buf_il);
    outloop.push(&buf_ol);
    Ok((inloop.finish()?, outloop.finish()?))
}

/// Average spectra bin-by-bin; the axes are identical by construction.
fn average(mut spectra: Vec<Psd>) -> anyhow::Result<Psd> {
    anyhow::ensure!(!spectra.is_empty(), "no spectra to average");
    let first = spectra.remove(0);
    let mut values = first.values.clone();
    let mut segments = first.segments_averaged;
    for p in &spectra {
        anyhow::ensure!(
            p.values.len() == values.len(),
            "spectrum grids disagree across seeds"
        );
        for (acc, v) in values.iter_mut().zip(&p.values) {
            *acc += v;
        }
        segments += p.segments_averaged;
    }
    let n = (spectra.len() + 1) as f64;
    for v in &mut values {
        *v /= n;
    }
    Ok(Psd::new(
        first.frequency_hz,
        values,
        first.rbw_hz,
        first.window,
        segments,
    )?)
}

/// Run the full sweep. `gains[0]` must be 0 — it anchors both references.
/// `seeds_per_gain[i]` independent runs are averaged at `gains[i]`.
pub fn run_cooling_sweep(
    sim: &SimulationSpec,
    gains: &[f64],
    seeds_per_gain: &[usize],
) -> anyhow::Result<CoolingSweep> {
    anyhow::ensure!(!gains.is_empty(), "need at least one gain");
    anyhow::ensure!(
        gains.len() == seeds_per_gain.len(),
        "gains ({}) and seeds-per-gain ({}) lengths differ",
        gains.len(),
        seeds_per_gain.len()
    );
    anyhow::ensure!(
        gains[0] == 0.0,
        "the first gain must be 0 (reference run), got {}",
        gains[0]
    );
    for &g in gains {
        anyhow::ensure!(g >= 0.0 && g.is_finite(), "gains must be ≥ 0, got {g}");
    }
    for (&g, &s) in gains.iter().zip(seeds_per_gain) {
        anyhow::ensure!(s >= 1, "seeds-per-gain must be ≥ 1 (gain {g} has {s})");
    }

    let mode = sim.controlled_mode()?;
    let env = sim.environment();
    let inloop_probe = ProbeModel::new("in-loop", sim.inloop_floor_internal(), 1.0)?;
    let measured_snr = snr(&mode, &env, &inloop_probe)?;
    let t0 = sim.bath_temperature_k;
    let f_m = mode.frequency_hz();
    let linewidth_hz = mode.damping / (2.0 * std::f64::consts::PI);

    // Every (gain, repeat) cell is an independent job with its own derived
    // seed; order of execution cannot affect the averaged output.
    let jobs: Vec<(usize, usize)> = gains
        .iter()
        .enumerate()
        .flat_map(|(gi, _)| (0..seeds_per_gain[gi]).map(move |si| (gi, si)))
        .collect();
    let runs: Vec<(usize, Psd, Psd)> = jobs
        .par_iter()
        .map(|&(gi, si)| {
            let seed = derive_run_seed(sim.seed, gi, si);
            let (il, ol) = run_single(sim, gains[gi], seed)?;
            Ok((gi, il, ol))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let mut spectra = Vec::with_capacity(gains.len());
    for (gi, &gain) in gains.iter().enumerate() {
        let il: Vec<Psd> = runs
            .iter()
            .filter(|(i, _, _)| *i == gi)
            .map(|(_, il, _)| il.clone())
            .collect();
        let ol: Vec<Psd> = runs
            .iter()
            .filter(|(i, _, _)| *i == gi)
            .map(|(_, _, ol)| ol.clone())
            .collect();
        spectra.push(GainSpectra {
            gain,
            inloop: average(il)?,
            outloop: average(ol)?,
        });
    }

    let il_floor = sim.inloop_noise_m2_per_hz;
    let ol_floor = sim.outloop_noise_m2_per_hz;
    let il_ref = spectra[0].inloop.band_area_above_floor(
        il_floor,
        band(f_m, INLOOP_BAND_HALF_LINEWIDTHS * linewidth_hz),
    );
    let ol_ref = spectra[0].outloop.band_area_above_floor(
        ol_floor,
        band(f_m, OUTLOOP_BAND_HALF_LINEWIDTHS * linewidth_hz),
    );
    anyhow::ensure!(
        il_ref > 0.0 && ol_ref > 0.0,
        "gain-zero reference areas must be positive (got in-loop {il_ref}, out-of-loop {ol_ref}); \
         increase duration or lower the noise floors"
    );

    let mut points = Vec::with_capacity(gains.len());
    for gs in &spectra {
        let g = gs.gain;
        let closed_loop = (1.0 + g) * linewidth_hz;
        let t_out = infer_temperature(
            &gs.outloop,
            ol_floor,
            band(f_m, OUTLOOP_BAND_HALF_LINEWIDTHS * closed_loop),
            ol_ref,
            t0,
        )?;
        let t_in = infer_temperature(
            &gs.inloop,
            il_floor,
            band(f_m, INLOOP_BAND_HALF_LINEWIDTHS * closed_loop),
            il_ref,
            t0,
        )?;
        let peak = peak_density(&gs.inloop, f_m, closed_loop);
        points.push(CoolingPoint {
            gain: g,
            t_outloop_k: t_out.value,
            t_inloop_k: t_in.value,
            t_theory_outloop_k: cooling_temperature(t0, g, measured_snr),
            t_theory_inloop_k: inferred_temperature_theory(LoopSide::InLoop, t0, g, measured_snr),
            unphysical: t_in.unphysical,
            inloop_peak_m2_per_hz: peak,
            scaled_inloop_peak_m2_per_hz: peak * (1.0 + g) * (1.0 + g),
        });
    }

    Ok(CoolingSweep {
        snr: measured_snr,
        points,
        spectra,
    })
}

/// The sweep table (fixed column set, no timestamps).
pub fn points_csv(sweep: &CoolingSweep) -> String {
    let mut out =
        String::from("gain,T_outloop_K,T_inloop_K,T_theory_outloop_K,T_theory_inloop_K,unphysical\n");
    for p in &sweep.points {
        out.push_str(&format!(
            "{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{}\n",
            p.gain, p.t_outloop_k, p.t_inloop_k, p.t_theory_outloop_k, p.t_theory_inloop_k,
            p.unphysical
        ));
    }
    out
}

/// Squashing diagnostics: the in-loop density near resonance and its
/// (1+g)²-rescaled value, which the loop identity pins to the gain-zero row.
pub fn squashing_csv(sweep: &CoolingSweep) -> String {
    let mut out = String::from("gain,S_IL_peak_m2_per_hz,scaled_peak_m2_per_hz\n");
    for p in &sweep.points {
        out.push_str(&format!(
            "{:.6e},{:.6e},{:.6e}\n",
            p.gain, p.inloop_peak_m2_per_hz, p.scaled_inloop_peak_m2_per_hz
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use langevin_sim::Integrator;

    fn tiny_spec() -> SimulationSpec {
        SimulationSpec {
            bath_temperature_k: 300.0,
            modes: vec![crate::config::ModeSpec {
                label: "desk".to_string(),
                mass_kg: 1.0e-12,
                resonance_hz: 1.0e4,
                linewidth_hz: 20.0,
            }],
            inloop_noise_m2_per_hz: 6.6e-26,
            outloop_noise_m2_per_hz: 6.6e-26,
            sample_rate_hz: 2.5e5,
            duration_s: 2.0,
            warmup_s: 0.1,
            delay_fraction: 0.25,
            welch_segment: 16_384,
            integrator: Integrator::ExactGaussian,
            drive: None,
            seed: 11,
        }
    }

    #[test]
    fn sweep_requires_a_zero_gain_anchor() {
        let spec = tiny_spec();
        let err = run_cooling_sweep(&spec, &[1.0, 2.0], &[1, 1]).unwrap_err();
        assert!(err.to_string().contains("first gain must be 0"), "{err}");
    }

    #[test]
    fn gain_and_seed_lists_must_align() {
        let spec = tiny_spec();
        assert!(run_cooling_sweep(&spec, &[0.0, 1.0], &[1]).is_err());
        assert!(run_cooling_sweep(&spec, &[0.0], &[0]).is_err());
    }

    #[test]
    fn zero_gain_point_reads_the_bath_temperature() {
        let spec = tiny_spec();
        let sweep = run_cooling_sweep(&spec, &[0.0], &[2]).unwrap();
        let p = &sweep.points[0];
        // The gain-zero row is inferred against its own reference, so the
        // ratio construction pins it to T0 exactly; theory agrees.
        assert!((p.t_outloop_k - 300.0).abs() < 1e-9);
        assert!((p.t_inloop_k - 300.0).abs() < 1e-9);
        assert_eq!(p.t_theory_outloop_k, 300.0);
        assert!(!p.unphysical);
        assert_eq!(p.scaled_inloop_peak_m2_per_hz, p.inloop_peak_m2_per_hz);
    }

    #[test]
    fn csv_tables_have_one_row_per_gain() {
        let spec = tiny_spec();
        let sweep = run_cooling_sweep(&spec, &[0.0, 2.0], &[1, 1]).unwrap();
        assert_eq!(points_csv(&sweep).lines().count(), 3);
        assert_eq!(squashing_csv(&sweep).lines().count(), 3);
        assert_eq!(sweep.spectra.len(), 2);
        // Theory columns come straight from the closed forms.
        let p = &sweep.points[1];
        assert_eq!(
            p.t_theory_outloop_k,
            cooling_temperature(300.0, 2.0, sweep.snr)
        );
    }
}
