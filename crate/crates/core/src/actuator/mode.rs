use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ActuatorError, Result};
use crate::constants::STEP_UM;
use crate::magnetics::{Polarity, PulseWaveform};
use crate::power::{discharge_pulse_with, recharge, CapacitorBank};
use crate::Surface;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Stable,
    Enhanced,
    Fastest,
}

impl ModeName {
    pub const ALL: [ModeName; 3] = [ModeName::Stable, ModeName::Enhanced, ModeName::Fastest];

    pub fn name(self) -> &'static str {
        match self {
            ModeName::Stable => "stable",
            ModeName::Enhanced => "enhanced",
            ModeName::Fastest => "fastest",
        }
    }
}

impl fmt::Display for ModeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModeName {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "stable" => Ok(ModeName::Stable),
            "enhanced" => Ok(ModeName::Enhanced),
            "fastest" => Ok(ModeName::Fastest),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveMode {
    pub name: ModeName,
    /// Hz
    pub pulse_frequency: f64,
    /// s
    pub dead_time: f64,
    /// Coil current held while the slider moves (A).
    pub continuous_current: f64,
    /// m
    pub step_distance: f64,
    /// Fraction of the supply the bank must regain before the next pulse.
    pub recharge_threshold: f64,
    /// Pulse shape; the amplitude is set by the bank at firing time.
    pub pulse: PulseWaveform,
}

impl DriveMode {
    pub fn stable() -> Self {
        Self {
            name: ModeName::Stable,
            pulse_frequency: 20.0,
            dead_time: 40e-3,
            continuous_current: 0.0,
            step_distance: STEP_UM as f64 * 1e-6,
            recharge_threshold: 0.99,
            pulse: PulseWaveform::standard(0.0, Polarity::Positive),
        }
    }

    pub fn enhanced() -> Self {
        Self {
            name: ModeName::Enhanced,
            continuous_current: 0.8,
            ..Self::stable()
        }
    }

    /// 200 Hz with a 10 µs dead time.
    pub fn fastest() -> Self {
        Self {
            name: ModeName::Fastest,
            pulse_frequency: 200.0,
            dead_time: 10e-6,
            ..Self::stable()
        }
    }

    pub fn from_name(name: ModeName) -> Self {
        match name {
            ModeName::Stable => Self::stable(),
            ModeName::Enhanced => Self::enhanced(),
            ModeName::Fastest => Self::fastest(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.pulse_frequency > 0.0
            && self.pulse_frequency.is_finite()
            && self.dead_time >= 0.0
            && self.dead_time.is_finite()
            && self.continuous_current >= 0.0
            && self.continuous_current.is_finite()
            && self.step_distance > 0.0
            && (0.0..1.0).contains(&self.recharge_threshold);
        if !ok {
            return Err(ActuatorError::InvalidParameter(format!(
                "invalid drive mode {self:?}"
            )));
        }
        self.pulse
            .validate()
            .map_err(ActuatorError::from)
    }
}

/// Per-surface settle times plus the time the continuous current must stay on
/// in enhanced mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepTiming {
    /// Indexed like `Surface::ALL` (s).
    pub settle: [f64; 4],
    /// s
    pub engage_time: f64,
}

impl Default for StepTiming {
    /// Fitted against the measured speed table.
    fn default() -> Self {
        Self {
            settle: [0.044, 0.049, 0.054, 0.059],
            engage_time: 0.121,
        }
    }
}

impl StepTiming {
    pub fn settle_time(&self, surface: Surface) -> f64 {
        self.settle[surface_index(surface)]
    }

    /// Settle time actually spent after the pulse under `mode`.
    pub fn effective_settle(&self, mode: &DriveMode, surface: Surface) -> f64 {
        let s = self.settle_time(surface);
        if mode.continuous_current > 0.0 {
            s.max(self.engage_time)
        } else {
            s
        }
    }
}

pub(crate) fn surface_index(surface: Surface) -> usize {
    Surface::ALL.iter().position(|&s| s == surface).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingOutcome {
    /// s
    pub duration: f64,
    /// Recharge wait before the pulse (s).
    pub wait: f64,
    /// Bank voltage when the pulse fires (V).
    pub voltage_at_pulse: f64,
    pub peak_current: f64,
    /// Bank state after the pulse.
    pub bank_after: CapacitorBank,
    /// J
    pub pulse_energy: f64,
    /// Energy of the continuous current (J).
    pub hold_energy: f64,
    /// Settle time after the pulse (s).
    pub settle: f64,
}

/// Timing and energy of one step. The bank recharges only during the wait,
/// which lasts until it regains the mode threshold or one pulse period has
/// passed, whichever is later.
pub fn step_timing(
    mode: &DriveMode,
    bank: &CapacitorBank,
    coil_resistance: f64,
    settle: f64,
) -> Result<TimingOutcome> {
    mode.validate()?;
    let to_threshold = bank.time_to_reach(mode.recharge_threshold * bank.supply_voltage);
    let wait = to_threshold.max(1.0 / mode.pulse_frequency);
    let charged = recharge(bank, wait);
    let d = discharge_pulse_with(&charged, coil_resistance, &mode.pulse)?;
    let hold_energy = mode.continuous_current.powi(2) * coil_resistance * settle;
    Ok(TimingOutcome {
        duration: wait + 2.0 * mode.dead_time + mode.pulse.duration() + settle,
        wait,
        voltage_at_pulse: charged.voltage,
        peak_current: d.peak_current,
        bank_after: d.bank,
        pulse_energy: d.energy,
        hold_energy,
        settle,
    })
}
