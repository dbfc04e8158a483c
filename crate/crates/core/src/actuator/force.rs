use serde::{Deserialize, Serialize};

use super::commutation::{equilibrium_um, plan_from, Direction, StepPlan};
use super::{ActuatorError, Result};
use crate::constants::{MODULE_SIDE, MODULE_SIDE_UM, NDFEB_BR};
use crate::magnetics::{dipole_force, ndfeb_moment, Dipole, Vec3};

/// Image periods summed on each side of the slider.
const IMAGE_RANGE: i64 = 3;
/// Samples per period when scanning for the peak drive force.
const PEAK_SAMPLES: usize = 300;

/// One commutation cell: three SEPs in the stator layer and two like-poled
/// NdFeB magnets on the slider, repeated with the module period along x.
/// Moments point along the layer normal (y).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMotorState {
    pub sep_polarities: [i8; 3],
    /// Signed remanent moments (A·m²).
    pub sep_moments: [f64; 3],
    /// m
    pub sep_positions: [f64; 3],
    /// Slider magnet offsets from `slider_pos` (m).
    pub slider_offsets: [f64; 2],
    /// A·m²
    pub slider_moment: f64,
    /// Slider position in integer micrometres so stepping is exact.
    pub slider_um: i64,
    /// Clearance between the two layers (m).
    pub gap: f64,
    /// Depth of the SEP dipole centre below the stator face (m).
    pub sep_depth: f64,
    /// Depth of the NdFeB dipole centre above the slider face (m).
    pub slider_depth: f64,
    /// Stroke period (m).
    pub period: f64,
}

impl LinearMotorState {
    /// Module geometry with every SEP carrying `sep_moment` times its polarity
    /// and the slider resting at the pattern's equilibrium.
    pub fn new(polarities: [i8; 3], sep_moment: f64) -> Result<Self> {
        let moments = polarities.map(|p| p as f64 * sep_moment.abs());
        Self::with_moments(polarities, moments)
    }

    pub fn with_moments(polarities: [i8; 3], moments: [f64; 3]) -> Result<Self> {
        if polarities.iter().any(|p| !(-1..=1).contains(p)) {
            return Err(ActuatorError::InvalidParameter(format!(
                "polarities must be -1, 0 or 1, got {polarities:?}"
            )));
        }
        let s = Self {
            sep_polarities: polarities,
            sep_moments: moments,
            sep_positions: [12.5e-3, 7.5e-3, 2.5e-3],
            slider_offsets: [-2.5e-3, 2.5e-3],
            slider_moment: ndfeb_moment(2e-3, 1.5e-3, NDFEB_BR),
            slider_um: equilibrium_um(polarities).unwrap_or(0),
            gap: 1e-3,
            sep_depth: 4e-3,
            slider_depth: 0.75e-3,
            period: MODULE_SIDE,
        };
        s.validate()?;
        Ok(s)
    }

    /// Home pattern of `direction` with the slider at its equilibrium.
    pub fn home(direction: Direction, sep_moment: f64) -> Result<Self> {
        Self::new(super::commutation::home_polarities(direction), sep_moment)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.gap > 0.0
            && self.gap.is_finite()
            && self.period > 0.0
            && self.sep_moments.iter().all(|m| m.is_finite())
            && self.slider_moment.is_finite();
        if !ok {
            return Err(ActuatorError::InvalidParameter(format!(
                "invalid motor geometry: gap {} period {}",
                self.gap, self.period
            )));
        }
        Ok(())
    }

    pub fn slider_pos(&self) -> f64 {
        self.slider_um as f64 * 1e-6
    }

    /// Normal distance between SEP and NdFeB dipole centres (m).
    pub fn normal_distance(&self) -> f64 {
        self.sep_depth + self.gap + self.slider_depth
    }

    pub fn at_um(&self, slider_um: i64) -> Self {
        Self {
            slider_um,
            ..self.clone()
        }
    }

    /// Slider position within one period (µm).
    pub fn phase_um(&self) -> i64 {
        self.slider_um.rem_euclid(MODULE_SIDE_UM)
    }

    pub fn at_equilibrium(&self) -> bool {
        equilibrium_um(self.sep_polarities) == Some(self.phase_um())
    }

    /// Plan continuing from the present pattern.
    pub fn plan(&self, direction: Direction, n_steps: usize) -> Result<StepPlan> {
        plan_from(self.sep_polarities, direction, n_steps)
    }

    /// Every SEP and slider magnet reflected through x = 0.
    pub fn mirrored(&self) -> Self {
        Self {
            sep_positions: self.sep_positions.map(|x| -x),
            slider_offsets: self.slider_offsets.map(|x| -x),
            slider_um: -self.slider_um,
            ..self.clone()
        }
    }
}

/// Axial force on the slider at its stored position (N).
pub fn motor_force(state: &LinearMotorState) -> Result<f64> {
    motor_force_at(state, state.slider_pos())
}

/// Axial force with the slider moved to `x` (m).
pub fn motor_force_at(state: &LinearMotorState, x: f64) -> Result<f64> {
    let dn = state.normal_distance();
    let p = state.period;
    let mut fx = 0.0;
    for (i, &xi) in state.sep_positions.iter().enumerate() {
        let m = state.sep_moments[i];
        if m == 0.0 {
            continue;
        }
        let k0 = ((x - xi) / p).round() as i64;
        for k in (k0 - IMAGE_RANGE)..=(k0 + IMAGE_RANGE) {
            let sep = Dipole::new(Vec3::new(0.0, m, 0.0), Vec3::new(xi + k as f64 * p, 0.0, 0.0));
            for off in state.slider_offsets {
                let mag = Dipole::new(
                    Vec3::new(0.0, state.slider_moment, 0.0),
                    Vec3::new(x + off, dn, 0.0),
                );
                fx += dipole_force(&sep, &mag)?.x;
            }
        }
    }
    Ok(fx)
}

/// Largest force along `direction` the pattern can exert anywhere over one
/// period (N).
pub fn peak_drive_force(state: &LinearMotorState, direction: Direction) -> Result<f64> {
    let sign = direction.sign() as f64;
    let x0 = state.slider_pos();
    let mut best = f64::NEG_INFINITY;
    for j in 0..PEAK_SAMPLES {
        let x = x0 + state.period * j as f64 / PEAK_SAMPLES as f64;
        best = best.max(sign * motor_force_at(state, x)?);
    }
    Ok(best)
}
