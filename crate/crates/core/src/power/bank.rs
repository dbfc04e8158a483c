use serde::{Deserialize, Serialize};

use super::{PowerError, Result};
use crate::magnetics::{Polarity, PulseWaveform};

/// Time for an empty bank to reach `RECHARGE_FRACTION` of the supply (s).
pub const RECHARGE_TIME: f64 = 0.1;
pub const RECHARGE_FRACTION: f64 = 0.95;

/// Charge resistance giving an exponential recharge that reaches
/// `RECHARGE_FRACTION` of the supply after `time` seconds.
pub fn charge_resistance_for(capacitance: f64, time: f64) -> f64 {
    time / (capacitance * (1.0 / (1.0 - RECHARGE_FRACTION)).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacitorBank {
    /// F
    pub capacitance: f64,
    /// V
    pub voltage: f64,
    /// V
    pub supply_voltage: f64,
    /// Ω
    pub charge_resistance: f64,
}

impl CapacitorBank {
    pub fn new(
        capacitance: f64,
        voltage: f64,
        supply_voltage: f64,
        charge_resistance: f64,
    ) -> Result<Self> {
        let ok = capacitance > 0.0
            && charge_resistance > 0.0
            && supply_voltage >= 0.0
            && (0.0..=supply_voltage).contains(&voltage)
            && [capacitance, voltage, supply_voltage, charge_resistance]
                .iter()
                .all(|v| v.is_finite());
        if !ok {
            return Err(PowerError::InvalidParameter(format!(
                "invalid bank: C={capacitance} V={voltage} supply={supply_voltage} R={charge_resistance}"
            )));
        }
        Ok(Self {
            capacitance,
            voltage,
            supply_voltage,
            charge_resistance,
        })
    }

    /// 2200 µF bank on a `supply` rail, fully charged.
    pub fn with_supply(supply: f64) -> Result<Self> {
        let c = 2200e-6;
        Self::new(c, supply, supply, charge_resistance_for(c, RECHARGE_TIME))
    }

    /// 2200 µF bank on a 16 V rail, fully charged.
    pub fn module_default() -> Self {
        Self::with_supply(16.0).expect("static bank is valid")
    }

    pub fn with_voltage(mut self, voltage: f64) -> Result<Self> {
        if !(0.0..=self.supply_voltage).contains(&voltage) {
            return Err(PowerError::InvalidParameter(format!(
                "voltage {voltage} outside [0, {}]",
                self.supply_voltage
            )));
        }
        self.voltage = voltage;
        Ok(self)
    }

    pub fn tau(&self) -> f64 {
        self.charge_resistance * self.capacitance
    }

    pub fn energy(&self) -> f64 {
        0.5 * self.capacitance * self.voltage * self.voltage
    }

    /// Time needed to reach `target` volts from the present voltage: zero if
    /// already there, infinite if the supply never gets there.
    pub fn time_to_reach(&self, target: f64) -> f64 {
        if self.voltage >= target {
            0.0
        } else if target >= self.supply_voltage {
            f64::INFINITY
        } else {
            self.tau() * ((self.supply_voltage - self.voltage) / (self.supply_voltage - target)).ln()
        }
    }
}

/// Exponential approach to the supply over `dt` seconds; a non-positive `dt`
/// leaves the bank unchanged and `f64::INFINITY` charges it fully.
pub fn recharge(bank: &CapacitorBank, dt: f64) -> CapacitorBank {
    let mut out = *bank;
    if dt > 0.0 {
        let deficit = (bank.supply_voltage - bank.voltage) * (-dt / bank.tau()).exp();
        out.voltage = (bank.supply_voltage - deficit).clamp(bank.voltage, bank.supply_voltage);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discharge {
    pub peak_current: f64,
    /// Trapezoid carrying the RC peak as its amplitude.
    pub waveform: PulseWaveform,
    pub bank: CapacitorBank,
    /// Energy dissipated in the coil (J).
    pub energy: f64,
}

/// Discharges the bank into a coil for one standard pulse width.
pub fn discharge_pulse(bank: &CapacitorBank, coil_resistance: f64) -> Result<Discharge> {
    discharge_pulse_with(
        bank,
        coil_resistance,
        &PulseWaveform::standard(0.0, Polarity::Positive),
    )
}

/// First-order RC discharge lasting `template.duration()`. Coil inductance is
/// neglected, so the current starts at V/R and all released energy heats the coil.
pub fn discharge_pulse_with(
    bank: &CapacitorBank,
    coil_resistance: f64,
    template: &PulseWaveform,
) -> Result<Discharge> {
    if !(coil_resistance > 0.0) || !coil_resistance.is_finite() {
        return Err(PowerError::InvalidParameter(format!(
            "coil resistance must be positive, got {coil_resistance}"
        )));
    }
    let v0 = bank.voltage;
    let peak = v0 / coil_resistance;
    let t = template.duration();
    let v1 = v0 * (-t / (coil_resistance * bank.capacitance)).exp();
    let mut after = *bank;
    after.voltage = v1;
    Ok(Discharge {
        peak_current: peak,
        waveform: template.with_peak(peak),
        bank: after,
        energy: 0.5 * bank.capacitance * (v0 * v0 - v1 * v1),
    })
}
