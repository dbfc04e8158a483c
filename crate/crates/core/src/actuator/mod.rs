//! The three-SEP / two-NdFeB linear motor: commutation, force along the
//! stroke, and timed step execution.

mod commutation;
mod force;
mod mode;
mod stepper;

pub use commutation::{
    equilibrium_um, home_polarities, plan_from, step_sequence, Direction, StepCommand, StepPlan,
};
pub use force::{motor_force, motor_force_at, peak_drive_force, LinearMotorState};
pub use mode::{step_timing, DriveMode, ModeName, StepTiming, TimingOutcome};
pub use stepper::{predict_speed, MotorDrive, StepContext, StepResult, SPEED_STEPS};

use thiserror::Error;

use crate::magnetics::MagneticsError;
use crate::power::PowerError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActuatorError {
    #[error("stall: peak drive force {peak_mn:.3} mN does not exceed the demand {demand_mn:.3} mN")]
    Stall { peak_mn: f64, demand_mn: f64 },
    #[error("polarity pattern {0:?} has no single attractive equilibrium")]
    NoEquilibrium([i8; 3]),
    #[error("toggling SEP {sep} from {from:?} does not produce a 2.5 mm step")]
    InvalidToggle { sep: u8, from: [i8; 3] },
    #[error("slider at {slider_um} um is not at the equilibrium of pattern {pattern:?}")]
    NotAtEquilibrium { slider_um: i64, pattern: [i8; 3] },
    #[error("SEP {sep} ended with polarity {achieved} instead of {wanted}")]
    IncompleteSwitch { sep: u8, wanted: i8, achieved: i8 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Magnetics(#[from] MagneticsError),
    #[error(transparent)]
    Power(#[from] PowerError),
}

pub type Result<T> = std::result::Result<T, ActuatorError>;
