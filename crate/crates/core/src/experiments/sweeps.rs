use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentError, Result};
use crate::magnetics::{
    apply_bias, apply_pulse, flux_metrics, flux_metrics_at, Coil, MaterialParams, Polarity, PulseWaveform,
    RodState, SolverConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    PulsePeak,
    Turns,
}

/// Fixed part of a sweep: material preset, coil and pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepContext {
    pub preset: String,
    /// Replaces the preset's constants, e.g. with a calibrated fit.
    #[serde(default)]
    pub material: Option<MaterialParams>,
    pub turns: u32,
    /// m
    pub coil_length: f64,
    /// A
    pub peak_current: f64,
    pub solver: SolverConfig,
}

impl Default for SweepContext {
    /// 250 turns wound exactly over the 8 mm rod, 20 A.
    fn default() -> Self {
        Self {
            preset: "table1".into(),
            material: None,
            turns: 250,
            coil_length: 8e-3,
            peak_current: 20.0,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub context: SweepContext,
}

impl SweepSpec {
    pub fn pulse_peak() -> Self {
        Self {
            parameter: SweepParameter::PulsePeak,
            min: 0.0,
            max: 30.0,
            steps: 31,
            context: SweepContext::default(),
        }
    }

    pub fn turns() -> Self {
        Self {
            parameter: SweepParameter::Turns,
            min: 0.0,
            max: 500.0,
            steps: 51,
            context: SweepContext::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 || !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite()
        {
            return Err(ExperimentError::InvalidSweep(format!(
                "need steps >= 2 and min < max, got {} points over [{}, {}]",
                self.steps, self.min, self.max
            )));
        }
        if self.parameter == SweepParameter::Turns && self.min < 0.0 {
            return Err(ExperimentError::InvalidSweep("turns cannot be negative".into()));
        }
        Ok(())
    }

    /// Evenly spaced values, endpoints included.
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.max
                } else {
                    self.min + (self.max - self.min) * i as f64 / n as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulsePoint {
    /// A
    pub peak_current: f64,
    /// Remanent flux density at the rod centre (T).
    pub b_center: f64,
    /// Remanent flux density averaged over segments (T).
    pub b_average: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurnsPoint {
    pub turns: u32,
    /// Applied field at the rod centre at peak current (A/m).
    pub h_center: f64,
    /// Flux density at the centre while the peak current flows (T).
    pub b_center_pulse: f64,
    pub b_average_pulse: f64,
    /// Remanent values after the pulse (T).
    pub b_center: f64,
    pub b_average: f64,
}

fn study_rod(ctx: &SweepContext) -> Result<RodState> {
    let m = match ctx.material {
        Some(m) => {
            m.validate()?;
            m
        }
        None => MaterialParams::preset(&ctx.preset)?,
    };
    Ok(RodState::study(m))
}

/// Remanence after one positive pulse from the demagnetized rod, per peak current.
pub fn sweep_pulse_peak(spec: &SweepSpec) -> Result<Vec<PulsePoint>> {
    spec.validate()?;
    if spec.parameter != SweepParameter::PulsePeak || spec.min < 0.0 {
        return Err(ExperimentError::InvalidSweep(
            "pulse sweep needs a non-negative pulse-peak range".into(),
        ));
    }
    let ctx = &spec.context;
    let rod = study_rod(ctx)?;
    let coil = Coil::study(ctx.turns, ctx.coil_length)?;
    spec.values()
        .par_iter()
        .map(|&i| {
            let wf = PulseWaveform::standard(i, Polarity::Positive);
            let out = apply_pulse(&rod, &coil, &wf, &ctx.solver)?;
            let f = flux_metrics(&out);
            Ok(PulsePoint {
                peak_current: i,
                b_center: f.b_center,
                b_average: f.b_average,
            })
        })
        .collect()
}

/// Field during and remanence after one pulse, per coil turn count.
/// Values are rounded to whole turns.
pub fn sweep_turns(spec: &SweepSpec) -> Result<Vec<TurnsPoint>> {
    spec.validate()?;
    if spec.parameter != SweepParameter::Turns {
        return Err(ExperimentError::InvalidSweep("turns sweep needs a turns range".into()));
    }
    let ctx = &spec.context;
    let rod = study_rod(ctx)?;
    let base = Coil::study(0, ctx.coil_length)?;
    let wf = PulseWaveform::standard(ctx.peak_current, Polarity::Positive);
    spec.values()
        .par_iter()
        .map(|&n| {
            let turns = n.round() as u32;
            let coil = base.with_turns(turns);
            let out = apply_pulse(&rod, &coil, &wf, &ctx.solver)?;
            // The model is rate independent, so ramping straight to the peak
            // reproduces the state at the top of the pulse.
            let on = apply_bias(&rod, &coil, ctx.peak_current, &ctx.solver)?;
            let during = flux_metrics_at(&on, &coil, ctx.peak_current);
            let rem = flux_metrics(&out);
            Ok(TurnsPoint {
                turns,
                h_center: coil.field_per_amp(0.0) * ctx.peak_current,
                b_center_pulse: during.b_center,
                b_average_pulse: during.b_average,
                b_center: rem.b_center,
                b_average: rem.b_average,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wrapping {
    Half,
    Exact,
    Extra,
}

impl Wrapping {
    pub const ALL: [Wrapping; 3] = [Wrapping::Half, Wrapping::Exact, Wrapping::Extra];

    /// Coil length over the 8 mm rod (m).
    pub fn coil_length(self) -> f64 {
        match self {
            Wrapping::Half => 4e-3,
            Wrapping::Exact => 8e-3,
            Wrapping::Extra => 10e-3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Wrapping::Half => "half",
            Wrapping::Exact => "exact",
            Wrapping::Extra => "extra",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageProfile {
    pub wrapping: Wrapping,
    pub coil_length: f64,
    /// Applied field at the rod centre at peak current (A/m).
    pub h_center: f64,
    /// Axial segment centres (m).
    pub z: Vec<f64>,
    /// Remanent M per segment as a fraction of Ms.
    pub m_fraction: Vec<f64>,
}

/// Remanent profiles for half, exact and extra wrapping with the coil centred on the rod.
pub fn coverage_study(ctx: &SweepContext) -> Result<Vec<CoverageProfile>> {
    let rod = study_rod(ctx)?;
    let wf = PulseWaveform::standard(ctx.peak_current, Polarity::Positive);
    Wrapping::ALL
        .par_iter()
        .map(|&w| {
            let coil = Coil::study(ctx.turns, w.coil_length())?;
            let out = apply_pulse(&rod, &coil, &wf, &ctx.solver)?;
            Ok(CoverageProfile {
                wrapping: w,
                coil_length: w.coil_length(),
                h_center: coil.field_per_amp(0.0) * ctx.peak_current,
                z: out.segment_centers(),
                m_fraction: out.segments.iter().map(|s| s.m / out.material.ms).collect(),
            })
        })
        .collect()
}
