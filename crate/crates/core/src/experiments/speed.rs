use serde::{Deserialize, Serialize};

use super::{CalibrationReport, ExperimentError, Result};
use crate::actuator::{predict_speed, DriveMode, ModeName};
use crate::Surface;

/// Modes in measurement-table order.
pub const TABLE_MODES: [ModeName; 3] = [ModeName::Fastest, ModeName::Stable, ModeName::Enhanced];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedTable {
    pub modes: Vec<ModeName>,
    pub surfaces: Vec<Surface>,
    /// mm/s, `cells[mode][surface]`.
    pub cells: Vec<Vec<f64>>,
}

impl SpeedTable {
    pub fn get(&self, mode: ModeName, surface: Surface) -> Option<f64> {
        let i = self.modes.iter().position(|&m| m == mode)?;
        let j = self.surfaces.iter().position(|&s| s == surface)?;
        Some(self.cells[i][j])
    }
}

/// Predicted speeds for every mode and surface with calibrated timing.
pub fn speed_table(report: Option<&CalibrationReport>) -> Result<SpeedTable> {
    let report = report.ok_or(ExperimentError::CalibrationMissing)?;
    if !report.timing_fitted() {
        return Err(ExperimentError::CalibrationMissing);
    }
    let bank = report.bank();
    let r = report.coil_resistance;
    let cells = TABLE_MODES
        .iter()
        .map(|&m| {
            let mode = DriveMode::from_name(m);
            Surface::ALL
                .iter()
                .map(|&s| Ok(predict_speed(&mode, s, &report.timing, r, &bank)?))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpeedTable {
        modes: TABLE_MODES.to_vec(),
        surfaces: Surface::ALL.to_vec(),
        cells,
    })
}
