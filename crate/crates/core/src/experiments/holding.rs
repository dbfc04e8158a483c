use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentError, Result};
use crate::world::HoldingModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldingGrid {
    /// V
    pub voltages: Vec<f64>,
    pub pulse_counts: Vec<u32>,
    /// `force_mn[i][j]` at `voltages[i]` after `pulse_counts[j]` pulses.
    pub force_mn: Vec<Vec<f64>>,
}

/// Holding force over drive voltage and pulse count, each cell starting from
/// a demagnetized rod.
pub fn holding_force_grid(
    model: &HoldingModel,
    voltages: &[f64],
    pulse_counts: &[u32],
) -> Result<HoldingGrid> {
    if voltages.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(ExperimentError::InvalidSweep(
            "voltages must be finite and non-negative".into(),
        ));
    }
    let max = pulse_counts.iter().copied().max().unwrap_or(0);
    let force_mn = voltages
        .par_iter()
        .map(|&v| {
            let by_count = model.forces_by_count(v, max);
            pulse_counts
                .iter()
                .map(|&n| if n == 0 { 0.0 } else { by_count[n as usize - 1] })
                .collect()
        })
        .collect();
    Ok(HoldingGrid {
        voltages: voltages.to_vec(),
        pulse_counts: pulse_counts.to_vec(),
        force_mn,
    })
}
