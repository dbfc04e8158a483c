use serde::{Deserialize, Serialize};

use super::{require, MagneticsError, Result};
use crate::constants::{ALNICO5_BR, ALNICO5_HC, MU0};

/// Jiles-Atherton constants plus the loop anchors they were fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Saturation magnetization (A/m).
    pub ms: f64,
    /// Anhysteretic shape parameter (A/m).
    pub a: f64,
    /// Pinning parameter (A/m).
    pub k: f64,
    /// Reversibility, 0..=1.
    pub c: f64,
    /// Mean-field coupling.
    pub alpha: f64,
    /// Coercivity (A/m).
    pub hc: f64,
    /// Residual flux density target (T).
    pub br: f64,
}

impl MaterialParams {
    pub fn new(ms: f64, a: f64, k: f64, c: f64, alpha: f64, hc: f64, br: f64) -> Result<Self> {
        let p = Self {
            ms,
            a,
            k,
            c,
            alpha,
            hc,
            br,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.ms, self.a, self.k, self.c, self.alpha, self.hc, self.br];
        require(all.iter().all(|v| v.is_finite()), || {
            "material constants must be finite".into()
        })?;
        require(self.ms > 0.0, || format!("Ms must be positive, got {}", self.ms))?;
        require(self.a > 0.0, || format!("a must be positive, got {}", self.a))?;
        require(self.k > 0.0, || format!("k must be positive, got {}", self.k))?;
        require((0.0..=1.0).contains(&self.c), || {
            format!("c must lie in [0, 1], got {}", self.c)
        })?;
        require(self.hc > 0.0, || format!("Hc must be positive, got {}", self.hc))?;
        require(self.br <= MU0 * self.ms, || {
            format!("Br = {} T exceeds mu0*Ms = {} T", self.br, MU0 * self.ms)
        })?;
        Ok(())
    }

    /// Low-flux preset used for the rod magnetization studies
    /// (Br = 0.03 T, Bs = 0.2 T). The loop is anchored with a tip of 10 Hc.
    pub fn table1() -> Self {
        Self {
            ms: 0.2 / MU0,
            a: 2000.0,
            k: TABLE1_K,
            c: 0.01,
            alpha: TABLE1_ALPHA,
            hc: ALNICO5_HC,
            br: 0.03,
        }
    }

    /// Datasheet preset for force and robot simulations (Br = 1.26 T).
    /// Saturation is taken as 1.4 T and the loop is anchored with a tip of 5 Hc.
    pub fn datasheet() -> Self {
        Self {
            ms: 1.4 / MU0,
            a: 2000.0,
            k: DATASHEET_K,
            c: 0.01,
            alpha: DATASHEET_ALPHA,
            hc: ALNICO5_HC,
            br: ALNICO5_BR,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "table1" => Ok(Self::table1()),
            "datasheet" => Ok(Self::datasheet()),
            other => Err(MagneticsError::InvalidParameter(format!(
                "unknown material preset '{other}' (expected table1 or datasheet)"
            ))),
        }
    }

    /// Peak field (in multiples of Hc) of the major loop each preset is fitted on.
    pub fn preset_loop_tip(name: &str) -> Option<f64> {
        match name {
            "table1" => Some(10.0),
            "datasheet" => Some(5.0),
            _ => None,
        }
    }

    /// Remanent magnetization target Br/mu0 (A/m).
    pub fn mr(&self) -> f64 {
        self.br / MU0
    }

    /// Saturation flux density mu0*Ms (T).
    pub fn bs(&self) -> f64 {
        MU0 * self.ms
    }

    /// Mean-field stability ratio alpha*Ms/(3a); the model stays single-valued
    /// while c times this ratio is below one.
    pub fn coupling_ratio(&self) -> f64 {
        self.alpha * self.ms / (3.0 * self.a)
    }
}

const TABLE1_K: f64 = 70511.36979944784;
const TABLE1_ALPHA: f64 = -1.5654802273014754;
const DATASHEET_K: f64 = 69857.72717497229;
const DATASHEET_ALPHA: f64 = 0.0022974514638021736;
