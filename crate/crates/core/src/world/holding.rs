use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{MU0, NDFEB_BR};
use crate::magnetics::{
    apply_pulse, magnet_moment, ndfeb_moment, Coil, MagnetKind, MaterialParams, Polarity,
    PulseWaveform, RodState, SolverConfig,
};
use crate::power::{CapacitorBank, DEFAULT_MIN_GATE_VOLTAGE};

/// Axial pull between a SEP rod and an NdFeB dipole whose centres sit
/// `gap` apart on a common axis (mN). The face polarity is chosen so the pair
/// attracts, so only |M| matters.
pub fn holding_force(rod: &RodState, ndfeb: f64, gap: f64) -> f64 {
    let m = magnet_moment(&MagnetKind::SepRod(rod)).abs();
    coaxial_attraction(m, ndfeb.abs(), gap) * 1e3
}

fn coaxial_attraction(m1: f64, m2: f64, d: f64) -> f64 {
    if !(d > 0.0) {
        return 0.0;
    }
    3.0 * MU0 * m1 * m2 / (2.0 * PI * d.powi(4))
}

/// Centre distance at which two coaxial moments attract with `force` (N).
pub fn gap_for_force(m1: f64, m2: f64, force: f64) -> f64 {
    (3.0 * MU0 * m1.abs() * m2.abs() / (2.0 * PI * force)).powf(0.25)
}

/// Holding force of a module connection as a function of drive voltage and
/// pulse count, starting from a demagnetized rod.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldingModel {
    pub rod: RodState,
    pub coil: Coil,
    pub solver: SolverConfig,
    /// Effective centre distance between SEP and NdFeB dipoles at contact (m).
    pub effective_gap: f64,
    pub ndfeb_moment: f64,
    pub min_gate_voltage: f64,
    /// Bank template; it is recharged to the drive voltage before every pulse.
    pub bank: CapacitorBank,
}

/// Saturated holding force at 16 V (mN).
pub const HOLDING_ANCHOR_MN: f64 = 75.0;
pub const HOLDING_ANCHOR_VOLTAGE: f64 = 16.0;
/// Pulse count treated as saturation; further pulses change M by < 1e-4 Ms.
pub const SATURATION_PULSES: u32 = 8;

impl HoldingModel {
    pub fn module_default() -> Self {
        let mut m = Self {
            rod: RodState::module_sep(MaterialParams::datasheet()),
            coil: Coil::module_sep(),
            solver: SolverConfig::default(),
            effective_gap: 6.2e-3,
            ndfeb_moment: ndfeb_moment(2e-3, 1.5e-3, NDFEB_BR),
            min_gate_voltage: DEFAULT_MIN_GATE_VOLTAGE,
            bank: CapacitorBank::module_default(),
        };
        m.calibrate_gap(HOLDING_ANCHOR_VOLTAGE, SATURATION_PULSES, HOLDING_ANCHOR_MN);
        m
    }

    /// Rod state after `pulses` positive pulses at `voltage`; `None` below the
    /// gate threshold, where no pulse is delivered.
    pub fn rod_after(&self, voltage: f64, pulses: u32) -> Option<RodState> {
        if voltage < self.min_gate_voltage {
            return None;
        }
        let bank = self
            .bank
            .with_voltage(voltage.min(self.bank.supply_voltage))
            .ok()?;
        let current = bank.voltage / self.coil.resistance;
        let wf = PulseWaveform::standard(current, Polarity::Positive);
        let mut rod = self.rod.demagnetized();
        for _ in 0..pulses {
            rod = apply_pulse(&rod, &self.coil, &wf, &self.solver).ok()?;
        }
        Some(rod)
    }

    /// Forces after 1..=`max_pulses` pulses at `voltage` (mN).
    pub fn forces_by_count(&self, voltage: f64, max_pulses: u32) -> Vec<f64> {
        let Some(first) = self.rod_after(voltage, 0) else {
            return vec![0.0; max_pulses as usize];
        };
        let current = voltage.min(self.bank.supply_voltage) / self.coil.resistance;
        let wf = PulseWaveform::standard(current, Polarity::Positive);
        let mut rod = first;
        let mut out = Vec::with_capacity(max_pulses as usize);
        for _ in 0..max_pulses {
            match apply_pulse(&rod, &self.coil, &wf, &self.solver) {
                Ok(r) => rod = r,
                Err(_) => break,
            }
            out.push(holding_force(&rod, self.ndfeb_moment, self.effective_gap));
        }
        out.resize(max_pulses as usize, 0.0);
        out
    }

    /// mN
    pub fn force(&self, voltage: f64, pulses: u32) -> f64 {
        match self.rod_after(voltage, pulses) {
            Some(rod) => holding_force(&rod, self.ndfeb_moment, self.effective_gap),
            None => 0.0,
        }
    }

    /// Sets the effective gap so that `pulses` at `voltage` give `target_mn`.
    /// Returns the gap, or `None` if the anchor drive leaves the rod unmagnetized.
    pub fn calibrate_gap(&mut self, voltage: f64, pulses: u32, target_mn: f64) -> Option<f64> {
        let rod = self.rod_after(voltage, pulses)?;
        let m = magnet_moment(&MagnetKind::SepRod(&rod));
        if m == 0.0 || !(target_mn > 0.0) {
            return None;
        }
        self.effective_gap = gap_for_force(m, self.ndfeb_moment, target_mn * 1e-3);
        Some(self.effective_gap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demagnetized_rod_holds_nothing() {
        let rod = RodState::module_sep(MaterialParams::datasheet());
        assert_eq!(holding_force(&rod, 4.8e-3, 6e-3), 0.0);
    }

    #[test]
    fn attraction_matches_dipole_force() {
        use crate::magnetics::{dipole_force, Dipole, Vec3};
        let a = Dipole::new(Vec3::new(0.03, 0.0, 0.0), Vec3::ZERO);
        let b = Dipole::new(Vec3::new(4.8e-3, 0.0, 0.0), Vec3::new(6e-3, 0.0, 0.0));
        let f = dipole_force(&a, &b).unwrap();
        assert!((coaxial_attraction(0.03, 4.8e-3, 6e-3) + f.x).abs() < 1e-12);
    }
}
