use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::runs::Report;
use crate::error::{Error, Result};

/// Writes `rows` as CSV with a header row.
pub fn write_csv<R: Serialize>(rows: &[R], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::Numerical(format!("cannot write {}: {e}", path.display())))?;
    write_csv_to(rows, file)
}

pub fn write_csv_to<R: Serialize, W: Write>(rows: &[R], sink: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| Error::Numerical(format!("cannot write CSV: {e}")))?;
    }
    writer.flush().map_err(|e| Error::Numerical(format!("cannot write CSV: {e}")))
}

/// `out.csv` → `out.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

#[derive(Serialize)]
struct Sidecar<'a> {
    command: &'a str,
    version: &'a str,
    config: &'a ExperimentConfig,
    fits: &'a [super::runs::SlopeFit],
    warnings: &'a [String],
    elapsed_seconds: f64,
    rows: usize,
}

/// Writes the CSV and its JSON sidecar (config echo, version, fits, timing).
pub fn write_report<R: Serialize>(
    command: &str,
    config: &ExperimentConfig,
    report: &Report<R>,
    path: &Path,
) -> Result<PathBuf> {
    write_csv(&report.rows, path)?;
    let meta = Sidecar {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config,
        fits: &report.fits,
        warnings: &report.warnings,
        elapsed_seconds: report.elapsed_seconds,
        rows: report.rows.len(),
    };
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Numerical(e.to_string()))?;
    fs::write(&side, text).map_err(|e| Error::Numerical(format!("cannot write {}: {e}", side.display())))?;
    Ok(side)
}
