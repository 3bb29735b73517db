use crate::error::SpectralError;
use crate::fit::SpectrumFit;
use crate::psd::Psd;
use crate::window::Window;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Write as _};
use std::path::Path;

/// Metadata that travels alongside a PSD CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsdSidecar {
    pub rbw_hz: f64,
    pub window: Window,
    pub segments_averaged: usize,
    /// Multiplicative scale already applied to the values (1.0 = raw).
    pub calibration_scale: f64,
}

/// Write `psd` as a two-column CSV plus a JSON sidecar at the same path
/// with the extension replaced by `.json`. Floats are written in Rust's
/// shortest round-trip form, so re-reading reproduces them bit for bit.
pub fn write_psd_csv(
    csv_path: &Path,
    psd: &Psd,
    calibration_scale: f64,
) -> Result<(), SpectralError> {
    let mut out = BufWriter::new(std::fs::File::create(csv_path)?);
    writeln!(out, "frequency_hz,psd_m2_per_hz")?;
    for (f, v) in psd.frequency_hz.iter().zip(psd.values.iter()) {
        writeln!(out, "{f},{v}")?;
    }
    out.flush()?;

    let sidecar = PsdSidecar {
        rbw_hz: psd.rbw_hz,
        window: psd.window,
        segments_averaged: psd.segments_averaged,
        calibration_scale,
    };
    let json = serde_json::to_string_pretty(&sidecar)?;
    std::fs::write(csv_path.with_extension("json"), json)?;
    Ok(())
}

/// Read a PSD written by [`write_psd_csv`] (CSV + `.json` sidecar).
pub fn read_psd_csv(csv_path: &Path) -> Result<(Psd, PsdSidecar), SpectralError> {
    let sidecar: PsdSidecar =
        serde_json::from_str(&std::fs::read_to_string(csv_path.with_extension("json"))?)?;

    let reader = BufReader::new(std::fs::File::open(csv_path)?);
    let mut lines = reader.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "frequency_hz,psd_m2_per_hz" => {}
        Some(Ok(h)) => {
            return Err(SpectralError::Malformed(format!(
                "unexpected header `{h}`"
            )))
        }
        _ => return Err(SpectralError::Malformed("empty file".into())),
    }
    let mut freq = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (f, v) = line
            .split_once(',')
            .ok_or_else(|| SpectralError::Malformed(format!("line {}: no comma", i + 2)))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| SpectralError::Malformed(format!("line {}: {e}", i + 2)))
        };
        freq.push(parse(f)?);
        values.push(parse(v)?);
    }
    let psd = Psd::new(
        freq,
        values,
        sidecar.rbw_hz,
        sidecar.window,
        sidecar.segments_averaged,
    )?;
    Ok((psd, sidecar))
}

/// Serialize a fit result to pretty JSON.
pub fn write_fit_json(path: &Path, fit: &SpectrumFit) -> Result<(), SpectralError> {
    std::fs::write(path, serde_json::to_string_pretty(fit)?)?;
    Ok(())
}
