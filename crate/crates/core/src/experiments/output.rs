use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CalibrationReport, Result};

/// Writes a CSV with a header row. Floats use Rust's shortest round-trip
/// formatting so identical inputs give identical bytes.
pub fn write_csv<P: AsRef<Path>>(path: P, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

fn io(e: csv::Error) -> super::ExperimentError {
    super::ExperimentError::Io(e.to_string())
}

/// Everything needed to reproduce one output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub command: String,
    pub preset: String,
    pub seed: u64,
    pub version: String,
    pub parameters: BTreeMap<String, String>,
    pub calibration: Option<CalibrationReport>,
}

impl RunMeta {
    pub fn new(command: &str, preset: &str, seed: u64) -> Self {
        Self {
            command: command.into(),
            preset: preset.into(),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            parameters: BTreeMap::new(),
            calibration: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }
}

/// Sidecar path: `out.csv` -> `out.meta.toml`.
pub fn meta_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.toml")
}

pub fn write_meta(csv: &Path, meta: &RunMeta) -> Result<PathBuf> {
    let path = meta_path(csv);
    let text = toml::to_string(meta)
        .map_err(|e| super::ExperimentError::Io(format!("metadata: {e}")))?;
    fs::write(&path, text)?;
    Ok(path)
}
