use serde::{Deserialize, Serialize};

use super::{require, MagneticsError, MaterialParams, Result};

/// Magnetization state of one rod segment.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JaState {
    /// Total magnetization (A/m).
    pub m: f64,
    /// Irreversible component (A/m).
    pub m_irr: f64,
    /// Last applied field (A/m).
    pub h_prev: f64,
}

impl JaState {
    pub const DEMAGNETIZED: JaState = JaState {
        m: 0.0,
        m_irr: 0.0,
        h_prev: 0.0,
    };

    pub fn negated(&self) -> JaState {
        JaState {
            m: -self.m,
            m_irr: -self.m_irr,
            h_prev: -self.h_prev,
        }
    }
}

/// Numerical settings for the hysteresis solver and the demagnetization cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Waveform sampling step (s).
    pub time_step: f64,
    /// Frequency of the decaying demagnetization sinusoid (Hz).
    pub demag_frequency: f64,
    /// Amplitude multiplier applied after each demagnetization cycle.
    pub demag_decay: f64,
    /// Residual |M| accepted after demagnetization, as a fraction of Ms.
    pub remanence_tolerance: f64,
    /// Largest field increment per sub-step, as a fraction of Hc.
    pub dh_max_fraction: f64,
    /// Phase samples per demagnetization cycle (multiple of 4 so peaks are hit).
    pub demag_samples_per_cycle: usize,
    /// Cycle cap for demagnetization.
    pub demag_max_cycles: usize,
    /// Demagnetization stops once the peak drive field falls below this fraction of Hc.
    pub demag_stop_fraction: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            time_step: 5.0e-7,
            demag_frequency: 2.0,
            demag_decay: 0.85,
            remanence_tolerance: 0.05,
            dh_max_fraction: 1.0 / 50.0,
            demag_samples_per_cycle: 256,
            demag_max_cycles: 200,
            demag_stop_fraction: 0.01,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        require(self.time_step > 0.0 && self.time_step.is_finite(), || {
            format!("time_step must be positive, got {}", self.time_step)
        })?;
        require(self.dh_max_fraction > 0.0 && self.dh_max_fraction.is_finite(), || {
            format!("dh_max_fraction must be positive, got {}", self.dh_max_fraction)
        })?;
        require(self.demag_frequency > 0.0, || {
            format!("demag_frequency must be positive, got {}", self.demag_frequency)
        })?;
        require(self.demag_decay > 0.0 && self.demag_decay < 1.0, || {
            format!("demag_decay must lie in (0, 1), got {}", self.demag_decay)
        })?;
        require(
            self.demag_samples_per_cycle >= 4 && self.demag_samples_per_cycle % 4 == 0,
            || {
                format!(
                    "demag_samples_per_cycle must be a positive multiple of 4, got {}",
                    self.demag_samples_per_cycle
                )
            },
        )?;
        Ok(())
    }

    pub fn dh_max(&self, material: &MaterialParams) -> f64 {
        material.hc * self.dh_max_fraction
    }
}

/// Langevin function coth(x) - 1/x, evaluated so that L(-x) == -L(x) exactly.
pub fn langevin(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < 1e-2 {
        let x2 = ax * ax;
        ax * (1.0 / 3.0 - x2 * (1.0 / 45.0 - x2 * (2.0 / 945.0 - x2 / 4725.0)))
    } else {
        1.0 / ax.tanh() - 1.0 / ax
    };
    v.copysign(x)
}

fn langevin_slope(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-2 {
        let x2 = ax * ax;
        1.0 / 3.0 - x2 * (1.0 / 15.0 - x2 * 2.0 / 189.0)
    } else if ax > 300.0 {
        1.0 / (ax * ax)
    } else {
        let s = ax.sinh();
        1.0 / (ax * ax) - 1.0 / (s * s)
    }
}

/// Anhysteretic magnetization Ms·L(He/a).
pub fn anhysteretic(material: &MaterialParams, he: f64) -> f64 {
    material.ms * langevin(he / material.a)
}

/// Solves M = c·Man(H + alpha·M) + (1 - c)·M_irr on [-Ms, Ms].
fn solve_total(material: &MaterialParams, h: f64, m_irr: f64, guess: f64) -> f64 {
    if h < 0.0 || (h == 0.0 && m_irr < 0.0) {
        return -solve_canonical(material, -h, -m_irr, -guess);
    }
    if h == 0.0 && m_irr == 0.0 {
        return 0.0;
    }
    solve_canonical(material, h, m_irr, guess)
}

fn solve_canonical(material: &MaterialParams, h: f64, m_irr: f64, guess: f64) -> f64 {
    let MaterialParams { ms, a, c, alpha, .. } = *material;
    let g = |m: f64| m - c * ms * langevin((h + alpha * m) / a) - (1.0 - c) * m_irr;
    let (mut lo, mut hi) = (-ms, ms);
    let mut m = guess.clamp(lo, hi);
    for _ in 0..200 {
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if gm > 0.0 {
            hi = m;
        } else {
            lo = m;
        }
        let slope = 1.0 - c * ms * alpha / a * langevin_slope((h + alpha * m) / a);
        let mut next = m - gm / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - m).abs() <= 1e-13 * ms || hi - lo <= 1e-13 * ms {
            return next;
        }
        m = next;
    }
    m
}

fn substep(material: &MaterialParams, state: JaState, h_next: f64) -> JaState {
    let dh = h_next - state.h_prev;
    if dh == 0.0 {
        return state;
    }
    let delta = if dh > 0.0 { 1.0 } else { -1.0 };
    let h_mid = state.h_prev + 0.5 * dh;
    let man = anhysteretic(material, h_mid + material.alpha * state.m);
    let diff = man - state.m_irr;
    let mut m_irr = state.m_irr;
    if delta * diff > 0.0 {
        let den = material.k * delta - material.alpha * diff;
        let mut step = diff / den * dh;
        if den * delta <= 0.0 || step.abs() > diff.abs() {
            step = diff;
        }
        m_irr += step;
    }
    let m = solve_total(material, h_next, m_irr, state.m);
    JaState {
        m,
        m_irr,
        h_prev: h_next,
    }
}

/// Advances one segment to `h_next`. Intermediate sub-steps land on the fixed
/// grid of multiples of `dh_max`, so the discretization does not depend on
/// where a ramp starts or ends and no sub-step exceeds `dh_max`.
pub fn ja_advance(
    material: &MaterialParams,
    state: JaState,
    h_next: f64,
    dh_max: f64,
) -> Result<JaState> {
    if !h_next.is_finite() {
        return Err(MagneticsError::NonFiniteField(h_next));
    }
    let h0 = state.h_prev;
    if h_next == h0 {
        return Ok(state);
    }
    let mut s = state;
    if h_next > h0 {
        let mut k = (h0 / dh_max).floor() + 1.0;
        while k * dh_max < h_next {
            s = substep(material, s, k * dh_max);
            k += 1.0;
        }
    } else {
        let mut k = (h0 / dh_max).ceil() - 1.0;
        while k * dh_max > h_next {
            s = substep(material, s, k * dh_max);
            k -= 1.0;
        }
    }
    Ok(substep(material, s, h_next))
}

/// One solver update using the configured sub-step cap.
pub fn ja_update(
    material: &MaterialParams,
    state: JaState,
    h_next: f64,
    cfg: &SolverConfig,
) -> Result<JaState> {
    ja_advance(material, state, h_next, cfg.dh_max(material))
}

/// Runs a field sequence and records M after every sample.
pub fn ja_trace(
    material: &MaterialParams,
    state: JaState,
    fields: &[f64],
    dh_max: f64,
) -> Result<(JaState, Vec<f64>)> {
    let mut s = state;
    let mut out = Vec::with_capacity(fields.len());
    for &h in fields {
        s = ja_advance(material, s, h, dh_max)?;
        out.push(s.m);
    }
    Ok((s, out))
}

/// Anchors read off a major loop: initial curve from the demagnetized state
/// up to `tip`, then the descending branch down to -tip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopMetrics {
    /// Magnetization at the loop tip (A/m).
    pub tip_m: f64,
    /// Remanence on the descending branch (A/m).
    pub mr: f64,
    /// Coercive field magnitude on the descending branch (A/m); `None` if M never crosses zero.
    pub hc: Option<f64>,
}

pub fn major_loop_metrics(material: &MaterialParams, tip: f64, dh_max: f64) -> Result<LoopMetrics> {
    let at_tip = ja_advance(material, JaState::DEMAGNETIZED, tip, dh_max)?;
    let at_zero = ja_advance(material, at_tip, 0.0, dh_max)?;
    // Walk down in dh_max increments until M changes sign, then bisect on H
    // restarting from the last state above zero.
    let mut prev = at_zero;
    let mut hc = None;
    let mut h = 0.0;
    while h > -tip {
        let h_next = (h - dh_max).max(-tip);
        let next = ja_advance(material, prev, h_next, dh_max)?;
        if next.m <= 0.0 {
            let (mut hi, mut lo) = (h, h_next);
            for _ in 0..60 {
                let mid = 0.5 * (hi + lo);
                let s = ja_advance(material, prev, mid, dh_max)?;
                if s.m > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hc = Some(-0.5 * (hi + lo));
            break;
        }
        prev = next;
        h = h_next;
    }
    Ok(LoopMetrics {
        tip_m: at_tip.m,
        mr: at_zero.m,
        hc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn langevin_is_odd_and_continuous_at_the_series_switch() {
        for &x in &[1e-9, 1e-3, 0.0099999, 0.01, 0.5, 3.0, 50.0, 800.0] {
            assert_eq!(langevin(-x), -langevin(x));
        }
        let below = langevin(0.01 - 1e-12);
        let above = langevin(0.01 + 1e-12);
        assert!((below - above).abs() < 1e-12);
        assert!((langevin(1.0) - (1.0 / 1.0f64.tanh() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn langevin_slope_matches_finite_difference() {
        for &x in &[0.001, 0.2, 1.5, 7.0] {
            let h = 1e-6;
            let fd = (langevin(x + h) - langevin(x - h)) / (2.0 * h);
            assert!((fd - langevin_slope(x)).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn zero_drive_keeps_state() {
        let mat = MaterialParams::table1();
        let cfg = SolverConfig::default();
        let mut s = JaState::DEMAGNETIZED;
        for _ in 0..10 {
            s = ja_update(&mat, s, 0.0, &cfg).unwrap();
        }
        assert_eq!(s.m, 0.0);
    }

    #[test]
    fn non_finite_field_is_rejected() {
        let mat = MaterialParams::table1();
        let cfg = SolverConfig::default();
        let err = ja_update(&mat, JaState::DEMAGNETIZED, f64::NAN, &cfg).unwrap_err();
        assert!(matches!(err, MagneticsError::NonFiniteField(_)));
    }

    #[test]
    fn state_satisfies_the_implicit_equation() {
        let mat = MaterialParams::datasheet();
        let cfg = SolverConfig::default();
        let mut s = JaState::DEMAGNETIZED;
        for &h in &[1.0e5, 2.4e5, -3.0e4, -2.0e5, 5.0e4] {
            s = ja_update(&mat, s, h, &cfg).unwrap();
            let rhs = mat.c * anhysteretic(&mat, h + mat.alpha * s.m) + (1.0 - mat.c) * s.m_irr;
            assert!((s.m - rhs).abs() < 1e-9 * mat.ms);
        }
    }
}
