//! Alnico5 rod magnetization: Jiles-Atherton hysteresis over an axially
//! segmented rod, finite-solenoid drive fields, and point-dipole forces.

mod coil;
mod dipole;
mod hysteresis;
mod material;
mod rod;
mod waveform;

pub use coil::{copper_resistance, solenoid_h_field, Coil};
pub use dipole::{
    dipole_force, dipole_force_with_gap, interaction_energy, interaction_energy_with_gap, Dipole,
    Vec3, DEFAULT_MIN_GAP,
};
pub use hysteresis::{
    anhysteretic, ja_advance, ja_trace, ja_update, langevin, major_loop_metrics, JaState,
    LoopMetrics, SolverConfig,
};
pub use material::MaterialParams;
pub use rod::{
    apply_bias, apply_pulse, apply_pulse_traced, demagnetize, flux_metrics, flux_metrics_at,
    magnet_moment, ndfeb_moment, FluxMetrics, MagnetKind, PulseTrace, RodState,
};
pub use waveform::{Polarity, PulseWaveform};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MagneticsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite applied field: {0}")]
    NonFiniteField(f64),
    #[error("dipole separation {separation:.3e} m is below the minimum gap {min_gap:.3e} m")]
    CoincidentDipoles { separation: f64, min_gap: f64 },
    #[error(
        "demagnetization failed: residual |M| = {residual:.4} Ms after {cycles} cycles (limit {limit} Ms)"
    )]
    DemagnetizationFailed {
        residual: f64,
        cycles: usize,
        limit: f64,
    },
}

pub type Result<T> = std::result::Result<T, MagneticsError>;

pub(crate) fn require(cond: bool, what: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(MagneticsError::InvalidParameter(what()))
    }
}
