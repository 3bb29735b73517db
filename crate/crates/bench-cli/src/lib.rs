//! Batch experiment harness for the feedback-cooling bench: JSON-configured
//! gain sweeps, drive sweeps, closed-form design curves, and spectrum
//! fitting, with per-invocation artifact directories and digest manifests.
//!
//! The `coems-bench` binary is a thin argument layer over this library;
//! every command body lives here so tests can drive it in-process.

pub mod analyze;
pub mod config;
pub mod design;
pub mod drive;
pub mod manifest;
pub mod seeds;
pub mod sweep;

pub use analyze::{run_analyze, AnalyzeOutcome, FitReport};
pub use config::{AnalyzeSpec, BenchConfig, DriveSpec, ModeSpec, SimulationSpec};
pub use design::{curve_csv, run_design, DesignPoint, DesignReport, DesignSummary};
pub use drive::{drive_csv, run_drive_sweep, DrivePoint, DriveSweep, Regression};
pub use manifest::{ArtifactEntry, RunDir, RunManifest};
pub use seeds::derive_run_seed;
pub use sweep::{
    points_csv, run_cooling_sweep, squashing_csv, CoolingPoint, CoolingSweep, GainSpectra,
};
