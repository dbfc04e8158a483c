//! Simulation and control of single-material electro-permanent (SEP) magnet
//! actuators and the cubic modular robot that slides on them.
//!
//! The crate is split the same way the hardware is: [`magnetics`] models the
//! Alnico5 rods, [`power`] the capacitor bank and multiplexed half-bridges,
//! [`actuator`] the three-SEP linear motor, [`world`] a planar set of modules,
//! [`experiments`] the reproduction sweeps and calibration, and [`cli`] the
//! command-line front end.

pub mod actuator;
pub mod cli;
pub mod constants;
pub mod experiments;
pub mod magnetics;
pub mod power;
pub mod surface;
pub mod world;

pub use surface::Surface;
