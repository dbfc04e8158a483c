use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{require, Result};
use crate::constants::RHO_COPPER;

/// Single-layer solenoid wound around a rod.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coil {
    pub turns: u32,
    /// Winding length L (m).
    pub length: f64,
    /// Inner winding radius (m); also the radius used for the on-axis field.
    pub inner_radius: f64,
    pub wire_diameter: f64,
    /// Series resistance (Ω).
    pub resistance: f64,
    /// Axial coverage [z0, z1] relative to the rod center (m).
    pub z0: f64,
    pub z1: f64,
}

/// Resistance of `turns` of round copper wire wound at the mean turn radius
/// `inner_radius + wire_diameter / 2`.
pub fn copper_resistance(turns: u32, inner_radius: f64, wire_diameter: f64) -> f64 {
    let wire_length = turns as f64 * 2.0 * PI * (inner_radius + 0.5 * wire_diameter);
    let area = PI * wire_diameter * wire_diameter / 4.0;
    RHO_COPPER * wire_length / area
}

impl Coil {
    /// Coil of the given winding length centered at `center` on the rod axis.
    pub fn new(
        turns: u32,
        length: f64,
        inner_radius: f64,
        wire_diameter: f64,
        center: f64,
    ) -> Result<Self> {
        require(length > 0.0 && length.is_finite(), || {
            format!("coil length must be positive, got {length}")
        })?;
        require(inner_radius > 0.0 && inner_radius.is_finite(), || {
            format!("coil radius must be positive, got {inner_radius}")
        })?;
        require(wire_diameter > 0.0 && wire_diameter.is_finite(), || {
            format!("wire diameter must be positive, got {wire_diameter}")
        })?;
        require(center.is_finite(), || "coil center must be finite".into())?;
        Ok(Self {
            turns,
            length,
            inner_radius,
            wire_diameter,
            resistance: copper_resistance(turns, inner_radius, wire_diameter),
            z0: center - 0.5 * length,
            z1: center + 0.5 * length,
        })
    }

    /// Replaces the wire-length resistance with a measured value.
    pub fn with_resistance(mut self, resistance: f64) -> Result<Self> {
        require(resistance > 0.0 && resistance.is_finite(), || {
            format!("resistance must be positive, got {resistance}")
        })?;
        self.resistance = resistance;
        Ok(self)
    }

    pub fn with_turns(mut self, turns: u32) -> Self {
        self.turns = turns;
        self.resistance = copper_resistance(turns, self.inner_radius, self.wire_diameter);
        self
    }

    /// Coil of the magnetization studies: 0.2 mm wire on a 1.5 mm radius rod,
    /// `length` chooses half, exact or extra wrapping of the 8 mm rod.
    pub fn study(turns: u32, length: f64) -> Result<Self> {
        Self::new(turns, length, 1.5e-3, 0.2e-3, 0.0)
    }

    /// Coil of a robot SEP: 250 turns of 0.15 mm wire over the 8 mm rod of 2.5 mm diameter.
    pub fn module_sep() -> Self {
        Self::new(250, 8.0e-3, 1.25e-3, 0.15e-3, 0.0).expect("static geometry is valid")
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.z0 + self.z1)
    }

    /// On-axis field per ampere at `z` (A/m per A).
    pub fn field_per_amp(&self, z: f64) -> f64 {
        solenoid_h_field(self, 1.0, z)
    }
}

/// On-axis field of a finite solenoid (A/m).
pub fn solenoid_h_field(coil: &Coil, current: f64, z: f64) -> f64 {
    if coil.turns == 0 || current == 0.0 {
        return 0.0;
    }
    let r = coil.inner_radius;
    let a = z - coil.z0;
    let b = coil.z1 - z;
    let n_per_len = coil.turns as f64 / coil.length;
    0.5 * n_per_len * current * (a / a.hypot(r) + b / b.hypot(r))
}
