//! Persistence for short simulation records: a CSV of the observable
//! columns plus a JSON sidecar echoing the full configuration, so every
//! stored record is reproducible bit for bit from its sidecar alone.

use crate::config::SimulationConfig;
use crate::engine::SimulationRecord;
use crate::error::SimError;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Write `record` to `csv_path` (columns `time,x,y_IL,y_OL,F_fb`) and the
/// generating configuration next to it at the same path with a `.json`
/// extension. Floats use shortest round-trip formatting.
pub fn write_record(
    csv_path: &Path,
    record: &SimulationRecord,
    config: &SimulationConfig,
) -> Result<(), SimError> {
    let file = std::fs::File::create(csv_path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "time,x,y_IL,y_OL,F_fb")?;
    for i in 0..record.x.len() {
        writeln!(
            w,
            "{},{},{},{},{}",
            i as f64 * record.dt,
            record.x[i],
            record.y_inloop[i],
            record.y_outloop[i],
            record.feedback_force[i]
        )?;
    }
    w.flush()?;

    let sidecar = csv_path.with_extension("json");
    let body = serde_json::to_string_pretty(config)?;
    std::fs::write(sidecar, body)?;
    Ok(())
}

/// Read back a configuration sidecar written by [`write_record`].
pub fn read_config_sidecar(path: &Path) -> Result<SimulationConfig, SimError> {
    let body = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&body)?)
}
