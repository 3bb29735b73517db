//! `coems-bench`: batch harness for the feedback-cooling bench.
//!
//! Exit codes: 0 success, 1 usage/IO error, 2 fit non-convergence.

use bench_cli::{config::BenchConfig, manifest::RunDir};
use clap::{Args, Parser, Subcommand};
use spectral_lab::write_psd_csv;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "coems-bench",
    version,
    about = "Feedback-cooling bench: design curves, gain sweeps, drive sweeps, spectrum fits"
)]
struct Cli {
    /// Worker threads for parallel runs (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    /// Parent directory for the timestamped run directory.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form cooling curve and optimum working point (no simulation).
    Design {
        #[command(flatten)]
        output: OutputArgs,
        /// Bath temperature T0 (K).
        #[arg(long = "t0-k", default_value_t = 300.0)]
        t0_k: f64,
        /// Thermal-peak-to-floor ratio of the in-loop probe.
        #[arg(long, default_value_t = 100.0)]
        snr: f64,
        /// Upper end of the gain grid.
        #[arg(long = "g-max", default_value_t = 50.0)]
        g_max: f64,
        /// Number of grid points.
        #[arg(long = "n-points", default_value_t = 200)]
        n_points: usize,
        /// Mechanical frequency (Hz) for the phonon occupancy at T_min.
        #[arg(long = "resonance-hz")]
        resonance_hz: Option<f64>,
        /// Label for the run directory only; design is deterministic.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte-Carlo gain sweep: both thermometers vs closed-form theory.
    CoolingSweep {
        #[command(flatten)]
        output: OutputArgs,
        /// Simulation config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated gains; 0 is prepended if missing (reference).
        #[arg(long, default_value = "0,1,2,4,8,16,32")]
        gains: String,
        /// Runs per gain: one number for all gains, or a comma list
        /// matching the gain list.
        #[arg(long = "seeds-per-gain", default_value = "1")]
        seeds_per_gain: String,
        /// Master seed override (defaults to the config's seed).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Resonant-drive voltage sweep with force inversion.
    DriveSweep {
        #[command(flatten)]
        output: OutputArgs,
        /// Simulation config (JSON) with a `drive` section.
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated drive voltages (V).
        #[arg(long, default_value = "0.5,1,1.5,2,2.5,3")]
        voltages: String,
        /// Master seed override (defaults to the config's seed).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit a saved PSD CSV to Lorentzians plus a white floor.
    Analyze {
        #[command(flatten)]
        output: OutputArgs,
        /// PSD CSV (with its .json sidecar next to it).
        psd: PathBuf,
        /// Config (JSON) with an `analyze` section holding the guesses.
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let usage_ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if usage_ok { 0 } else { 1 };
        }
    };
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
        {
            eprintln!("error: cannot size the thread pool: {e}");
            return 1;
        }
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn parse_list(raw: &str, what: &str) -> anyhow::Result<Vec<f64>> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| anyhow::anyhow!("bad {what} entry `{tok}`: {e}"))
        })
        .collect()
}

fn argv() -> Vec<String> {
    std::env::args().collect()
}

fn dispatch(command: Command) -> anyhow::Result<i32> {
    match command {
        Command::Design {
            output,
            t0_k,
            snr,
            g_max,
            n_points,
            resonance_hz,
            seed,
        } => cmd_design(&output.out, t0_k, snr, g_max, n_points, resonance_hz, seed),
        Command::CoolingSweep {
            output,
            config,
            gains,
            seeds_per_gain,
            seed,
        } => cmd_cooling_sweep(&output.out, &config, &gains, &seeds_per_gain, seed),
        Command::DriveSweep {
            output,
            config,
            voltages,
            seed,
        } => cmd_drive_sweep(&output.out, &config, &voltages, seed),
        Command::Analyze {
            output,
            psd,
            config,
        } => cmd_analyze(&output.out, &psd, &config),
    }
}

fn cmd_design(
    out: &Path,
    t0_k: f64,
    snr: f64,
    g_max: f64,
    n_points: usize,
    resonance_hz: Option<f64>,
    seed: u64,
) -> anyhow::Result<i32> {
    let report = bench_cli::run_design(t0_k, snr, g_max, n_points, resonance_hz)?;
    let mut run = RunDir::create(out, seed)?;

    let curve_path = run.file("design_curve.csv");
    std::fs::write(&curve_path, bench_cli::curve_csv(&report))?;
    run.register(&curve_path)?;
    let summary_path = run.file("design_summary.json");
    std::fs::write(&summary_path, serde_json::to_string_pretty(&report.summary)?)?;
    run.register(&summary_path)?;

    let config_echo = serde_json::json!({
        "t0_k": t0_k, "snr": snr, "g_max": g_max, "n_points": n_points,
        "resonance_hz": resonance_hz,
    });
    let dir = run.finalize(&argv(), seed, config_echo, None)?;
    println!("run-dir: {}", dir.display());
    println!(
        "T_min = {:.4} K at g_opt = {:.4} (T0 = {t0_k} K, SNR = {snr})",
        report.summary.min_temperature_k, report.summary.optimal_gain
    );
    if let Some(n) = report.summary.occupancy_at_min {
        println!("phonon occupancy at T_min: {n:.3e}");
    }
    Ok(0)
}

/// Pair each requested gain with its run count, broadcast a single count
/// across all gains, add the mandatory gain-0 reference when missing, and
/// sort by gain so the table reads monotonically.
fn gain_plan(gains_raw: &str, seeds_raw: &str) -> anyhow::Result<(Vec<f64>, Vec<usize>)> {
    let gains = parse_list(gains_raw, "gain")?;
    let counts: Vec<usize> = parse_list(seeds_raw, "seeds-per-gain")?
        .iter()
        .map(|&s| {
            if s >= 1.0 && s.fract() == 0.0 && s <= 1e6 {
                Ok(s as usize)
            } else {
                Err(anyhow::anyhow!(
                    "seeds-per-gain entries must be integers ≥ 1, got {s}"
                ))
            }
        })
        .collect::<anyhow::Result<_>>()?;
    let counts = if counts.len() == 1 {
        vec![counts[0]; gains.len()]
    } else if counts.len() == gains.len() {
        counts
    } else {
        anyhow::bail!(
            "seeds-per-gain has {} entries but the gain list has {}",
            counts.len(),
            gains.len()
        )
    };
    let mut pairs: Vec<(f64, usize)> = gains.into_iter().zip(counts).collect();
    if !pairs.iter().any(|(g, _)| *g == 0.0) {
        let reference_runs = pairs[0].1;
        pairs.insert(0, (0.0, reference_runs));
        eprintln!("note: gain 0 added as the reference run");
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(pairs.into_iter().unzip())
}

fn cmd_cooling_sweep(
    out: &Path,
    config_path: &Path,
    gains_raw: &str,
    seeds_raw: &str,
    seed_override: Option<u64>,
) -> anyhow::Result<i32> {
    let cfg = BenchConfig::load(config_path)?;
    let mut sim = cfg.simulation()?.clone();
    if let Some(seed) = seed_override {
        sim.seed = seed;
    }
    let (gains, seeds) = gain_plan(gains_raw, seeds_raw)?;

    let mut run = RunDir::create(out, sim.seed)?;
    let config_echo = serde_json::to_value(&sim)?;
    let sweep = match bench_cli::run_cooling_sweep(&sim, &gains, &seeds) {
        Ok(sweep) => sweep,
        Err(e) => {
            // Abort, but leave a manifest recording how far the run got.
            let dir = run.finalize(&argv(), sim.seed, config_echo, Some(format!("{e:#}")))?;
            eprintln!("run-dir: {} (partial)", dir.display());
            return Err(e);
        }
    };

    let points_path = run.file("cooling_points.csv");
    std::fs::write(&points_path, bench_cli::points_csv(&sweep))?;
    run.register(&points_path)?;
    let squash_path = run.file("squashing_peaks.csv");
    std::fs::write(&squash_path, bench_cli::squashing_csv(&sweep))?;
    run.register(&squash_path)?;
    for gs in &sweep.spectra {
        for (channel, psd) in [("inloop", &gs.inloop), ("outloop", &gs.outloop)] {
            let csv = run.file(&format!("psd_gain{}_{channel}.csv", gs.gain));
            write_psd_csv(&csv, psd, 1.0)?;
            run.register(&csv)?;
            run.register(&csv.with_extension("json"))?;
        }
    }

    let dir = run.finalize(&argv(), sim.seed, config_echo, None)?;
    println!("run-dir: {}", dir.display());
    println!("SNR at resonance: {:.3}", sweep.snr);
    for p in &sweep.points {
        println!(
            "g = {:>6.2}: T_OL = {:>8.2} K (theory {:>8.2}), T_IL = {:>8.2} K (theory {:>8.2}){}",
            p.gain,
            p.t_outloop_k,
            p.t_theory_outloop_k,
            p.t_inloop_k,
            p.t_theory_inloop_k,
            if p.unphysical { "  [unphysical]" } else { "" }
        );
    }
    Ok(0)
}

fn cmd_drive_sweep(
    out: &Path,
    config_path: &Path,
    voltages_raw: &str,
    seed_override: Option<u64>,
) -> anyhow::Result<i32> {
    let cfg = BenchConfig::load(config_path)?;
    let mut sim = cfg.simulation()?.clone();
    if let Some(seed) = seed_override {
        sim.seed = seed;
    }
    let voltages = parse_list(voltages_raw, "voltage")?;

    let mut run = RunDir::create(out, sim.seed)?;
    let config_echo = serde_json::to_value(&sim)?;
    let sweep = match bench_cli::run_drive_sweep(&sim, &voltages) {
        Ok(sweep) => sweep,
        Err(e) => {
            let dir = run.finalize(&argv(), sim.seed, config_echo, Some(format!("{e:#}")))?;
            eprintln!("run-dir: {} (partial)", dir.display());
            return Err(e);
        }
    };

    let labels: Vec<String> = sim.modes.iter().map(|m| m.label.clone()).collect();
    let table_path = run.file("drive_sweep.csv");
    std::fs::write(&table_path, bench_cli::drive_csv(&sweep, &labels))?;
    run.register(&table_path)?;
    let summary_path = run.file("drive_summary.json");
    std::fs::write(&summary_path, serde_json::to_string_pretty(&sweep)?)?;
    run.register(&summary_path)?;

    let dir = run.finalize(&argv(), sim.seed, config_echo, None)?;
    println!("run-dir: {}", dir.display());
    println!(
        "driven mode: {} ({})",
        sweep.driven_mode, labels[sweep.driven_mode]
    );
    println!(
        "actuation calibration: {:.4e} N/V",
        sweep.force_per_volt_estimate
    );
    if let Some(reg) = &sweep.asd_regression {
        println!(
            "peak ASD vs V: slope {:.4e} m/(sqrt(Hz)·V), intercept {:.2e}, R² = {:.6}",
            reg.slope, reg.intercept, reg.r_squared
        );
    }
    for p in &sweep.points {
        println!(
            "V = {:>5.2}: peak ASD = {:.4e} m/sqrt(Hz), inferred F = {:.4e} N",
            p.voltage_v,
            p.peak_asd_m_per_sqrt_hz[sweep.driven_mode],
            p.inferred_force_n
        );
    }
    Ok(0)
}

fn cmd_analyze(out: &Path, psd_path: &Path, config_path: &Path) -> anyhow::Result<i32> {
    let cfg = BenchConfig::load(config_path)?;
    let spec = cfg.analyze_spec()?;
    let outcome = bench_cli::run_analyze(psd_path, spec)?;

    let mut run = RunDir::create(out, 0)?;
    let report_path = run.file("fit_report.json");
    let report_json = serde_json::to_string_pretty(&outcome.report)?;
    std::fs::write(&report_path, &report_json)?;
    run.register(&report_path)?;
    let model_path = run.file("model_psd.csv");
    write_psd_csv(&model_path, &outcome.model, 1.0)?;
    run.register(&model_path)?;
    run.register(&model_path.with_extension("json"))?;

    let config_echo = serde_json::to_value(spec)?;
    let dir = run.finalize(&argv(), 0, config_echo, None)?;
    println!("run-dir: {}", dir.display());
    println!("{report_json}");
    Ok(if outcome.fit.converged { 0 } else { 2 })
}
