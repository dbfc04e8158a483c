//! Physical constants and hardware figures shared across modules.

use std::f64::consts::PI;

/// Vacuum permeability (H/m).
pub const MU0: f64 = 4.0e-7 * PI;

/// Resistivity of annealed copper at 20 °C (Ω·m).
pub const RHO_COPPER: f64 = 1.724e-8;

/// Standard gravity (m/s²).
pub const GRAVITY: f64 = 9.81;

/// Coercivity of Alnico5 (A/m).
pub const ALNICO5_HC: f64 = 48.0e3;

/// Residual induction of Alnico5 from the material datasheet (T).
pub const ALNICO5_BR: f64 = 1.26;

/// Residual induction of the NdFeB slider magnets (T).
pub const NDFEB_BR: f64 = 1.28;

/// Side length of a cubic module (m).
pub const MODULE_SIDE: f64 = 15.0e-3;

/// Mass of a module including magnets (kg).
pub const MODULE_MASS: f64 = 0.012;

/// Displacement produced by one commutation step, in micrometres.
pub const STEP_UM: i64 = 2_500;

/// Module side length in micrometres.
pub const MODULE_SIDE_UM: i64 = 15_000;
