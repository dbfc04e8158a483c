//! Pulse supply: capacitor bank, four multiplexed half-bridges driving three
//! coils, and a dead-time aware gate scheduler with its validator.

mod bank;
mod bridge;
mod schedule;
mod synth;

pub use bank::{
    charge_resistance_for, discharge_pulse, discharge_pulse_with, recharge, CapacitorBank,
    Discharge, RECHARGE_FRACTION, RECHARGE_TIME,
};
pub use bridge::{build_multiplex, HalfBridge, HbId, MultiplexAssignment, Switch};
pub use schedule::{
    conduction_intervals, validate_schedule, Action, DeadTimeConfig, GateEvent, GateSchedule,
    SwitchOffset, ValidationReport, Violation,
};
pub use synth::{synth_pulse, PulseScheduler, PulseSlot, DEFAULT_MIN_GATE_VOLTAGE};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PowerError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("schedule line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("coil {0} is not in the multiplex assignment")]
    UnknownCoil(u8),
    #[error("bank voltage {voltage:.3} V is below the gate-functional minimum {minimum:.3} V")]
    InsufficientVoltage { voltage: f64, minimum: f64 },
}

pub type Result<T> = std::result::Result<T, PowerError>;
