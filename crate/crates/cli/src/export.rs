//! Report files: JSON always, CSV of `(round, distance, bound, ratio)` on request.

use std::path::Path;

use hyperforge::verify::OrbitReport;
use serde::Serialize;

use crate::CliError;

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(hyperforge::Error::from)?;
    std::fs::write(path, text + "\n").map_err(hyperforge::Error::from)?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<OrbitReport, CliError> {
    let text = std::fs::read_to_string(path).map_err(hyperforge::Error::from)?;
    Ok(serde_json::from_str(&text).map_err(hyperforge::Error::from)?)
}

#[derive(Serialize)]
struct CsvRow {
    round: u64,
    distance: f64,
    bound: f64,
    ratio: f64,
}

/// One row per round; an empty report gives the header alone.
pub fn write_csv(report: &OrbitReport, path: &Path) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    w.write_record(["round", "distance", "bound", "ratio"])?;
    for r in &report.rounds {
        w.serialize(CsvRow {
            round: r.round,
            distance: r.distance.to_f64(),
            bound: r.bound.to_f64(),
            ratio: r.ratio,
        })?;
    }
    w.flush().map_err(hyperforge::Error::from)?;
    Ok(())
}
