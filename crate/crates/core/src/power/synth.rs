use serde::{Deserialize, Serialize};

use super::{
    Action, CapacitorBank, DeadTimeConfig, GateEvent, GateSchedule, MultiplexAssignment,
    PowerError, Result,
};
use crate::actuator::DriveMode;
use crate::magnetics::Polarity;

/// Below this bank voltage the gate drivers cannot switch the MOSFETs (V).
pub const DEFAULT_MIN_GATE_VOLTAGE: f64 = 4.0;

/// Time window reserved for one pulse: leading dead time, conduction, trailing dead time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSlot {
    pub coil: u8,
    pub polarity: Polarity,
    pub slot_start: f64,
    pub pulse_start: f64,
    pub pulse_end: f64,
    pub slot_end: f64,
}

/// Serializes pulse requests onto a shared set of half-bridges.
#[derive(Debug, Clone)]
pub struct PulseScheduler {
    mux: MultiplexAssignment,
    dead: DeadTimeConfig,
    pub min_gate_voltage: f64,
    free_at: [f64; 5],
    schedule: GateSchedule,
}

impl PulseScheduler {
    pub fn new(mux: MultiplexAssignment, dead: DeadTimeConfig) -> Self {
        Self {
            mux,
            dead,
            min_gate_voltage: DEFAULT_MIN_GATE_VOLTAGE,
            free_at: [0.0; 5],
            schedule: GateSchedule::empty(),
        }
    }

    pub fn schedule(&self) -> &GateSchedule {
        &self.schedule
    }

    pub fn dead_time(&self) -> &DeadTimeConfig {
        &self.dead
    }

    /// Books a pulse no earlier than `earliest`, after both of the coil's
    /// half-bridges have finished their previous slot.
    pub fn request(
        &mut self,
        coil: u8,
        polarity: Polarity,
        pulse_width: f64,
        earliest: f64,
        bank: &CapacitorBank,
    ) -> Result<PulseSlot> {
        if bank.voltage < self.min_gate_voltage {
            return Err(PowerError::InsufficientVoltage {
                voltage: bank.voltage,
                minimum: self.min_gate_voltage,
            });
        }
        if !(pulse_width > 0.0) || !pulse_width.is_finite() {
            return Err(PowerError::InvalidParameter(format!(
                "pulse width must be positive, got {pulse_width}"
            )));
        }
        let (a, b) = self.mux.bridges(coil)?;
        let [(ha, sa), (hb, sb)] = self.mux.drive_switches(coil, polarity)?;
        let slot_start = earliest
            .max(self.free_at[a as usize])
            .max(self.free_at[b as usize]);
        let pulse_start = slot_start + self.dead.dead_time;
        let pulse_end = pulse_start + pulse_width;
        let slot_end = pulse_end + self.dead.dead_time;
        self.schedule.extend(&[
            GateEvent::new(pulse_start, ha, sa, Action::On),
            GateEvent::new(pulse_start, hb, sb, Action::On),
            GateEvent::new(pulse_end, ha, sa, Action::Off),
            GateEvent::new(pulse_end, hb, sb, Action::Off),
        ])?;
        self.free_at[a as usize] = slot_end;
        self.free_at[b as usize] = slot_end;
        Ok(PulseSlot {
            coil,
            polarity,
            slot_start,
            pulse_start,
            pulse_end,
            slot_end,
        })
    }

    /// Highest repetition rate for back-to-back pulses on one coil (Hz).
    pub fn max_pulse_frequency(&self, pulse_width: f64) -> f64 {
        1.0 / (pulse_width + 2.0 * self.dead.dead_time)
    }
}

/// Gate schedule of a single pulse on an idle bridge set.
pub fn synth_pulse(
    coil: u8,
    polarity: Polarity,
    mode: &DriveMode,
    mux: &MultiplexAssignment,
    dt: &DeadTimeConfig,
    bank: &CapacitorBank,
) -> Result<GateSchedule> {
    let mut s = PulseScheduler::new(mux.clone(), dt.clone());
    s.request(coil, polarity, mode.pulse.duration(), 0.0, bank)?;
    Ok(s.schedule)
}
