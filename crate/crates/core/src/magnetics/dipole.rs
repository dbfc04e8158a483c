use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::{MagneticsError, Result};
use crate::constants::MU0;

/// Separation below which the point-dipole model is refused (m).
pub const DEFAULT_MIN_GAP: f64 = 0.5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Point dipole.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Dipole {
    /// Moment (A·m²).
    pub moment: Vec3,
    /// Position (m).
    pub position: Vec3,
}

impl Dipole {
    pub fn new(moment: Vec3, position: Vec3) -> Self {
        Self { moment, position }
    }
}

fn separation(d1: &Dipole, d2: &Dipole, min_gap: f64) -> Result<(Vec3, f64)> {
    let r = d2.position - d1.position;
    let dist = r.norm();
    if !(dist >= min_gap) || dist == 0.0 {
        return Err(MagneticsError::CoincidentDipoles {
            separation: dist,
            min_gap,
        });
    }
    Ok((r * (1.0 / dist), dist))
}

/// Force on `d2` due to `d1` (N).
pub fn dipole_force(d1: &Dipole, d2: &Dipole) -> Result<Vec3> {
    dipole_force_with_gap(d1, d2, DEFAULT_MIN_GAP)
}

pub fn dipole_force_with_gap(d1: &Dipole, d2: &Dipole, min_gap: f64) -> Result<Vec3> {
    let (u, r) = separation(d1, d2, min_gap)?;
    let (m1, m2) = (d1.moment, d2.moment);
    let a = m1.dot(u);
    let b = m2.dot(u);
    let pre = 3.0 * MU0 / (4.0 * PI * r.powi(4));
    Ok((m2 * a + m1 * b + u * (m1.dot(m2) - 5.0 * a * b)) * pre)
}

/// Interaction energy of the pair (J).
pub fn interaction_energy(d1: &Dipole, d2: &Dipole) -> Result<f64> {
    interaction_energy_with_gap(d1, d2, DEFAULT_MIN_GAP)
}

pub fn interaction_energy_with_gap(d1: &Dipole, d2: &Dipole, min_gap: f64) -> Result<f64> {
    let (u, r) = separation(d1, d2, min_gap)?;
    let (m1, m2) = (d1.moment, d2.moment);
    Ok(-MU0 / (4.0 * PI * r.powi(3)) * (3.0 * m1.dot(u) * m2.dot(u) - m1.dot(m2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coaxial(m: f64, d: f64) -> (Dipole, Dipole) {
        (
            Dipole::new(Vec3::new(m, 0.0, 0.0), Vec3::ZERO),
            Dipole::new(Vec3::new(m, 0.0, 0.0), Vec3::new(d, 0.0, 0.0)),
        )
    }

    #[test]
    fn coaxial_unit_moments_attract_with_sixty_newtons() {
        let (a, b) = coaxial(1.0, 10e-3);
        let f = dipole_force(&a, &b).unwrap();
        assert!((f.x + 60.0).abs() < 1e-9, "{f:?}");
        assert_eq!(f.y, 0.0);
    }

    #[test]
    fn zero_moment_gives_zero_force() {
        let (a, mut b) = coaxial(1.0, 10e-3);
        b.moment = Vec3::ZERO;
        assert_eq!(dipole_force(&a, &b).unwrap(), Vec3::ZERO);
    }

    #[test]
    fn too_close_is_an_error() {
        let (a, b) = coaxial(1.0, 0.4e-3);
        assert!(matches!(
            dipole_force(&a, &b),
            Err(MagneticsError::CoincidentDipoles { .. })
        ));
    }
}
