//! Scripted studies with CSV output and the calibration of free constants.

mod calibration;
mod holding;
mod output;
mod speed;
mod sweeps;

pub use calibration::{
    calibrate, fit_ja, AnchorSet, CalibrationReport, JaFit, Residual, SpeedAnchor, FIT_TOLERANCE,
    MEASURED_SPEEDS, SPEED_TOLERANCE,
};
pub use holding::{holding_force_grid, HoldingGrid};
pub use output::{meta_path, write_csv, write_meta, RunMeta};
pub use speed::{speed_table, SpeedTable, TABLE_MODES};
pub use sweeps::{
    coverage_study, sweep_pulse_peak, sweep_turns, CoverageProfile, PulsePoint, SweepContext,
    SweepParameter, SweepSpec, TurnsPoint, Wrapping,
};

use thiserror::Error;

use crate::actuator::ActuatorError;
use crate::magnetics::MagneticsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("speed table needs calibrated settle times; run calibrate first")]
    CalibrationMissing,
    #[error("calibration needs at least one anchor")]
    EmptyAnchorSet,
    #[error("fit of {what} diverged: {diagnostics}")]
    FitDiverged { what: String, diagnostics: String },
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Magnetics(#[from] MagneticsError),
    #[error(transparent)]
    Actuator(#[from] ActuatorError),
}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        ExperimentError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
