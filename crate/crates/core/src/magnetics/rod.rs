use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{
    ja_update, require, Coil, JaState, MagneticsError, MaterialParams, PulseWaveform, Result,
    SolverConfig,
};
use crate::constants::MU0;

/// Alnico5 rod split into equal axial segments, centered at z = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RodState {
    pub material: MaterialParams,
    pub radius: f64,
    pub length: f64,
    pub segments: Vec<JaState>,
}

pub const DEFAULT_SEGMENTS: usize = 17;

impl RodState {
    pub fn new(material: MaterialParams, radius: f64, length: f64, segments: usize) -> Result<Self> {
        material.validate()?;
        require(radius > 0.0 && radius.is_finite(), || {
            format!("rod radius must be positive, got {radius}")
        })?;
        require(length > 0.0 && length.is_finite(), || {
            format!("rod length must be positive, got {length}")
        })?;
        require(segments >= 3 && segments % 2 == 1, || {
            format!("segment count must be odd and at least 3, got {segments}")
        })?;
        Ok(Self {
            material,
            radius,
            length,
            segments: vec![JaState::DEMAGNETIZED; segments],
        })
    }

    /// 3 mm diameter, 8 mm rod of the magnetization studies.
    pub fn study(material: MaterialParams) -> Self {
        Self::new(material, 1.5e-3, 8.0e-3, DEFAULT_SEGMENTS).expect("static geometry is valid")
    }

    /// 2.5 mm diameter, 8 mm rod fitted in a robot module.
    pub fn module_sep(material: MaterialParams) -> Self {
        Self::new(material, 1.25e-3, 8.0e-3, DEFAULT_SEGMENTS).expect("static geometry is valid")
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn center_index(&self) -> usize {
        self.segments.len() / 2
    }

    pub fn segment_center(&self, i: usize) -> f64 {
        let n = self.segments.len() as f64;
        -0.5 * self.length + (i as f64 + 0.5) * self.length / n
    }

    pub fn segment_centers(&self) -> Vec<f64> {
        (0..self.segments.len()).map(|i| self.segment_center(i)).collect()
    }

    pub fn volume(&self) -> f64 {
        PI * self.radius * self.radius * self.length
    }

    pub fn mean_m(&self) -> f64 {
        self.segments.iter().map(|s| s.m).sum::<f64>() / self.segments.len() as f64
    }

    pub fn max_abs_m(&self) -> f64 {
        self.segments.iter().map(|s| s.m.abs()).fold(0.0, f64::max)
    }

    /// Same rod with every segment's state mirrored.
    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        for s in &mut out.segments {
            *s = s.negated();
        }
        out
    }

    /// Same geometry and material, every segment demagnetized.
    pub fn demagnetized(&self) -> Self {
        let mut out = self.clone();
        out.segments.fill(JaState::DEMAGNETIZED);
        out
    }

    fn field_factors(&self, coil: &Coil) -> Vec<f64> {
        self.segment_centers()
            .into_iter()
            .map(|z| coil.field_per_amp(z))
            .collect()
    }
}

/// Pulse result with the per-segment extremes reached while the current flowed.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrace {
    pub rod: RodState,
    /// Largest |H| applied to each segment (A/m).
    pub peak_field: Vec<f64>,
    /// Largest |M| reached by each segment (A/m).
    pub peak_m: Vec<f64>,
}

/// Drives every segment through the full trapezoidal pulse.
pub fn apply_pulse(
    rod: &RodState,
    coil: &Coil,
    wf: &PulseWaveform,
    cfg: &SolverConfig,
) -> Result<RodState> {
    Ok(apply_pulse_traced(rod, coil, wf, cfg)?.rod)
}

pub fn apply_pulse_traced(
    rod: &RodState,
    coil: &Coil,
    wf: &PulseWaveform,
    cfg: &SolverConfig,
) -> Result<PulseTrace> {
    wf.validate()?;
    cfg.validate()?;
    require(cfg.time_step <= wf.rise_time / 10.0, || {
        format!(
            "time_step {} exceeds a tenth of the rise time {}",
            cfg.time_step, wf.rise_time
        )
    })?;
    let factors = rod.field_factors(coil);
    // The model is rate independent, so between the corners of the trapezoid
    // only the end points of each monotone ramp matter.
    let i = wf.peak_current * wf.polarity.sign();
    let corners = [i, 0.0];
    let mut out = rod.clone();
    let mut peak_field = vec![0.0; factors.len()];
    let mut peak_m: Vec<f64> = rod.segments.iter().map(|s| s.m.abs()).collect();
    for (idx, seg) in out.segments.iter_mut().enumerate() {
        let g = factors[idx];
        for &current in &corners {
            let h = g * current;
            *seg = ja_update(&rod.material, *seg, h, cfg)?;
            peak_field[idx] = f64::max(peak_field[idx], h.abs());
            peak_m[idx] = f64::max(peak_m[idx], seg.m.abs());
        }
    }
    Ok(PulseTrace {
        rod: out,
        peak_field,
        peak_m,
    })
}

/// Holds a steady coil current and returns the rod state while it flows.
pub fn apply_bias(
    rod: &RodState,
    coil: &Coil,
    current: f64,
    cfg: &SolverConfig,
) -> Result<RodState> {
    let factors = rod.field_factors(coil);
    let mut out = rod.clone();
    for (seg, g) in out.segments.iter_mut().zip(factors) {
        *seg = ja_update(&rod.material, *seg, g * current, cfg)?;
    }
    Ok(out)
}

/// Decaying sinusoidal erase. The sinusoid is sampled by phase; the model is
/// rate independent so the 1/f period only sets the elapsed time.
pub fn demagnetize(
    rod: &RodState,
    coil: &Coil,
    start_amplitude: f64,
    cfg: &SolverConfig,
) -> Result<RodState> {
    cfg.validate()?;
    require(start_amplitude >= 0.0 && start_amplitude.is_finite(), || {
        format!("start amplitude must be non-negative, got {start_amplitude}")
    })?;
    let mat = rod.material;
    let factors = rod.field_factors(coil);
    let g_max = factors.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let stop = cfg.demag_stop_fraction * mat.hc;
    let phases: Vec<f64> = (1..=cfg.demag_samples_per_cycle)
        .map(|j| (2.0 * PI * j as f64 / cfg.demag_samples_per_cycle as f64).sin())
        .collect();

    let mut out = rod.clone();
    let mut amp = start_amplitude;
    let mut cycles = 0;
    while cycles < cfg.demag_max_cycles && amp * g_max >= stop {
        for (seg, g) in out.segments.iter_mut().zip(&factors) {
            for s in &phases {
                *seg = ja_update(&mat, *seg, g * amp * s, cfg)?;
            }
        }
        amp *= cfg.demag_decay;
        cycles += 1;
    }
    for seg in out.segments.iter_mut() {
        *seg = ja_update(&mat, *seg, 0.0, cfg)?;
    }
    let residual = out.max_abs_m() / mat.ms;
    if residual >= cfg.remanence_tolerance {
        return Err(MagneticsError::DemagnetizationFailed {
            residual,
            cycles,
            limit: cfg.remanence_tolerance,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxMetrics {
    /// Flux density of the middle segment (T).
    pub b_center: f64,
    /// Arithmetic mean over segments (T).
    pub b_average: f64,
}

/// Flux density with no current flowing, B = mu0·M.
pub fn flux_metrics(rod: &RodState) -> FluxMetrics {
    let b: Vec<f64> = rod.segments.iter().map(|s| MU0 * s.m).collect();
    FluxMetrics {
        b_center: b[rod.center_index()],
        b_average: b.iter().sum::<f64>() / b.len() as f64,
    }
}

/// Flux density while `current` flows in `coil`, B = mu0·(H + M).
pub fn flux_metrics_at(rod: &RodState, coil: &Coil, current: f64) -> FluxMetrics {
    let b: Vec<f64> = rod
        .segments
        .iter()
        .zip(rod.segment_centers())
        .map(|(s, z)| MU0 * (coil.field_per_amp(z) * current + s.m))
        .collect();
    FluxMetrics {
        b_center: b[rod.center_index()],
        b_average: b.iter().sum::<f64>() / b.len() as f64,
    }
}

pub enum MagnetKind<'a> {
    SepRod(&'a RodState),
    NdFeB { diameter: f64, length: f64, br: f64 },
}

/// Signed axial dipole moment (A·m²): volume-averaged M times volume.
pub fn magnet_moment(kind: &MagnetKind<'_>) -> f64 {
    match kind {
        MagnetKind::SepRod(rod) => rod.mean_m() * rod.volume(),
        MagnetKind::NdFeB {
            diameter,
            length,
            br,
        } => ndfeb_moment(*diameter, *length, *br),
    }
}

pub fn ndfeb_moment(diameter: f64, length: f64, br: f64) -> f64 {
    br / MU0 * PI * 0.25 * diameter * diameter * length
}
