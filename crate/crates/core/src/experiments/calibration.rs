use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ExperimentError, Result};
use crate::actuator::{predict_speed, DriveMode, ModeName, StepTiming};
use crate::constants::MU0;
use crate::magnetics::{major_loop_metrics, Coil, MaterialParams, SolverConfig};
use crate::power::{charge_resistance_for, CapacitorBank, RECHARGE_FRACTION, RECHARGE_TIME};
use crate::world::{HoldingModel, HOLDING_ANCHOR_VOLTAGE, SATURATION_PULSES};
use crate::Surface;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedAnchor {
    pub mode: ModeName,
    pub surface: Surface,
    /// mm/s
    pub mm_s: f64,
}

/// Measured module speeds (mm/s).
pub const MEASURED_SPEEDS: [(ModeName, Surface, f64); 12] = [
    (ModeName::Fastest, Surface::Glass, 20.0),
    (ModeName::Fastest, Surface::Paper, 20.0),
    (ModeName::Fastest, Surface::Wood, 18.0),
    (ModeName::Fastest, Surface::Cement, 18.0),
    (ModeName::Stable, Surface::Glass, 13.0),
    (ModeName::Stable, Surface::Paper, 13.0),
    (ModeName::Stable, Surface::Wood, 12.0),
    (ModeName::Stable, Surface::Cement, 12.0),
    (ModeName::Enhanced, Surface::Glass, 9.0),
    (ModeName::Enhanced, Surface::Paper, 9.0),
    (ModeName::Enhanced, Surface::Wood, 9.0),
    (ModeName::Enhanced, Surface::Cement, 9.0),
];

/// Tolerance on speed anchors (mm/s).
pub const SPEED_TOLERANCE: f64 = 2.0;
/// Relative tolerance on loop, recharge and holding anchors.
pub const FIT_TOLERANCE: f64 = 1e-6;

/// Target values the free constants are fitted to. Absent anchors leave their
/// constants at the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorSet {
    /// Material preset the loop anchors refine.
    pub preset: String,
    /// Residual flux density (T).
    pub br: Option<f64>,
    /// Saturation flux density (T).
    pub bs: Option<f64>,
    /// Coercivity (A/m).
    pub hc: Option<f64>,
    /// Time for an empty bank to reach 95 % (s).
    pub recharge_time: Option<f64>,
    /// Saturated holding force at 16 V (mN).
    pub holding_mn: Option<f64>,
    pub speeds: Vec<SpeedAnchor>,
}

impl AnchorSet {
    pub fn empty(preset: &str) -> Self {
        Self {
            preset: preset.into(),
            br: None,
            bs: None,
            hc: None,
            recharge_time: None,
            holding_mn: None,
            speeds: Vec::new(),
        }
    }

    /// Every published anchor: the low-flux loop, the 100 ms recharge, the
    /// 75 mN holding force and the twelve speeds.
    pub fn published() -> Self {
        Self {
            br: Some(0.03),
            bs: Some(0.2),
            hc: Some(48e3),
            recharge_time: Some(RECHARGE_TIME),
            holding_mn: Some(75.0),
            speeds: MEASURED_SPEEDS
                .iter()
                .map(|&(mode, surface, mm_s)| SpeedAnchor {
                    mode,
                    surface,
                    mm_s,
                })
                .collect(),
            ..Self::empty("table1")
        }
    }

    pub fn is_empty(&self) -> bool {
        self.br.is_none()
            && self.bs.is_none()
            && self.hc.is_none()
            && self.recharge_time.is_none()
            && self.holding_mn.is_none()
            && self.speeds.is_empty()
    }

    fn has_loop(&self) -> bool {
        self.br.is_some() || self.bs.is_some() || self.hc.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub anchor: String,
    pub target: f64,
    pub model: f64,
    /// Allowed |model - target|, in anchor units.
    pub tolerance: f64,
    pub within: bool,
}

impl Residual {
    fn new(anchor: impl Into<String>, target: f64, model: f64, tolerance: f64) -> Self {
        Self {
            anchor: anchor.into(),
            target,
            model,
            tolerance,
            within: (model - target).abs() <= tolerance,
        }
    }
}

/// Fitted constants with their provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub seed: u64,
    pub preset: String,
    pub material: MaterialParams,
    /// Loop tip used for the fit, in units of Hc.
    pub loop_tip_factor: f64,
    /// Holding-force dipole centre distance (m).
    pub effective_gap: f64,
    pub timing: StepTiming,
    /// s
    pub recharge_time: f64,
    /// Ω
    pub charge_resistance: f64,
    /// Ω
    pub coil_resistance: f64,
    /// Names of constant groups set by this fit.
    pub fitted: Vec<String>,
    /// Constant groups left at their defaults.
    pub unfitted: Vec<String>,
    /// Anchors the model cannot reach, or fitted outputs breaking a stated pattern.
    pub flags: Vec<String>,
    pub residuals: Vec<Residual>,
}

const GROUPS: [&str; 8] = [
    "ja",
    "recharge",
    "holding_gap",
    "settle_glass",
    "settle_paper",
    "settle_wood",
    "settle_cement",
    "engage_time",
];

impl CalibrationReport {
    /// Uncalibrated defaults for `preset`, every group flagged unfitted.
    pub fn defaults(preset: &str) -> Result<Self> {
        let material = MaterialParams::preset(preset)?;
        let bank = CapacitorBank::module_default();
        Ok(Self {
            seed: 0,
            preset: preset.into(),
            material,
            loop_tip_factor: MaterialParams::preset_loop_tip(preset).unwrap_or(10.0),
            effective_gap: HoldingModel::module_default().effective_gap,
            timing: StepTiming::default(),
            recharge_time: RECHARGE_TIME,
            charge_resistance: bank.charge_resistance,
            coil_resistance: Coil::module_sep().resistance,
            fitted: Vec::new(),
            unfitted: GROUPS.iter().map(|s| s.to_string()).collect(),
            flags: Vec::new(),
            residuals: Vec::new(),
        })
    }

    fn mark_fitted(&mut self, group: &str) {
        self.unfitted.retain(|g| g != group);
        if !self.fitted.iter().any(|g| g == group) {
            self.fitted.push(group.into());
        }
    }

    pub fn is_fitted(&self, group: &str) -> bool {
        self.fitted.iter().any(|g| g == group)
    }

    /// All settle times and the engage time come from a fit.
    pub fn timing_fitted(&self) -> bool {
        GROUPS[3..].iter().all(|g| self.is_fitted(g))
    }

    /// Module bank with the calibrated recharge constant, fully charged.
    pub fn bank(&self) -> CapacitorBank {
        let mut b = CapacitorBank::module_default();
        b.charge_resistance = self.charge_resistance;
        b
    }

    pub fn holding_model(&self) -> HoldingModel {
        let mut m = HoldingModel::module_default();
        m.bank = self.bank();
        m.effective_gap = self.effective_gap;
        m
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| ExperimentError::Io(format!("calibration: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ExperimentError::Io(format!("calibration: {e}")))
    }
}

/// Golden-section minimum of `f` on [lo, hi].
fn golden<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-12 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Root of a decreasing `f(x) = target` on [lo, hi], bisected until the
/// bracket stops shrinking. Clamps to the ends when the target is out of range.
fn bisect_decreasing<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    if f(lo) <= target {
        return lo;
    }
    if f(hi) >= target {
        return hi;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return if (f(lo) - target).abs() <= (f(hi) - target).abs() { lo } else { hi };
        }
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Upper bound for settle and engage times during the fit (s).
const MAX_SETTLE: f64 = 1.0;

/// Fits the constants each anchor informs. `prior` seeds the loop fit so a
/// re-run on its own output is a fixed point.
pub fn calibrate(
    anchors: &AnchorSet,
    seed: u64,
    prior: Option<&CalibrationReport>,
) -> Result<CalibrationReport> {
    if anchors.is_empty() {
        return Err(ExperimentError::EmptyAnchorSet);
    }
    let mut rep = CalibrationReport::defaults(&anchors.preset)?;
    rep.seed = seed;
    if let Some(p) = prior.filter(|p| p.preset == anchors.preset) {
        rep.material = p.material;
    }
    let cfg = SolverConfig::default();

    if anchors.has_loop() {
        fit_loop(anchors, seed, &cfg, &mut rep)?;
    }

    if let Some(t) = anchors.recharge_time {
        if !(t > 0.0) || !t.is_finite() {
            return Err(ExperimentError::FitDiverged {
                what: "recharge".into(),
                diagnostics: format!("recharge time must be positive, got {t}"),
            });
        }
        rep.recharge_time = t;
        rep.charge_resistance = charge_resistance_for(rep.bank().capacitance, t);
        let empty = rep.bank().with_voltage(0.0).expect("0 V is in range");
        let model = empty.time_to_reach(RECHARGE_FRACTION * empty.supply_voltage);
        rep.residuals
            .push(Residual::new("recharge_time_s", t, model, FIT_TOLERANCE * t));
        rep.mark_fitted("recharge");
    }

    if let Some(target) = anchors.holding_mn {
        let mut hm = rep.holding_model();
        let gap = hm.calibrate_gap(HOLDING_ANCHOR_VOLTAGE, SATURATION_PULSES, target);
        match gap {
            Some(g) => {
                rep.effective_gap = g;
                rep.mark_fitted("holding_gap");
                let sat = hm.force(HOLDING_ANCHOR_VOLTAGE, SATURATION_PULSES);
                rep.residuals
                    .push(Residual::new("holding_saturated_mN", target, sat, FIT_TOLERANCE * target));
                let one = hm.force(HOLDING_ANCHOR_VOLTAGE, 1);
                rep.residuals
                    .push(Residual::new("holding_16V_1pulse_mN", target, one, 0.1 * target));
            }
            None => {
                return Err(ExperimentError::FitDiverged {
                    what: "holding_gap".into(),
                    diagnostics: format!(
                        "a {HOLDING_ANCHOR_VOLTAGE} V drive leaves the rod unmagnetized or the target {target} mN is not positive"
                    ),
                })
            }
        }
    }

    if !anchors.speeds.is_empty() {
        fit_speeds(anchors, &mut rep)?;
    }
    Ok(rep)
}

fn fit_loop(
    anchors: &AnchorSet,
    seed: u64,
    cfg: &SolverConfig,
    rep: &mut CalibrationReport,
) -> Result<()> {
    let mut base = rep.material;
    if let Some(bs) = anchors.bs {
        base.ms = bs / MU0;
    }
    if let Some(br) = anchors.br {
        base.br = br;
    }
    if let Some(hc) = anchors.hc {
        base.hc = hc;
    }
    if !(base.br > 0.0) || base.br >= MU0 * base.ms || !(base.hc > 0.0) {
        rep.flags.push(format!(
            "loop anchors out of reach: Br = {} T needs 0 < Br < Bs = {} T and Hc > 0",
            base.br,
            MU0 * base.ms
        ));
        return Err(ExperimentError::FitDiverged {
            what: "ja".into(),
            diagnostics: format!("Br = {} T, Bs = {} T, Hc = {} A/m", base.br, MU0 * base.ms, base.hc),
        });
    }
    let fit = fit_ja(&base, rep.loop_tip_factor, cfg, seed, 4).ok_or_else(|| {
        ExperimentError::FitDiverged {
            what: "ja".into(),
            diagnostics: "no start produced a closed loop crossing M = 0".into(),
        }
    })?;
    if fit.mr_residual.abs() > FIT_TOLERANCE || fit.hc_residual.abs() > FIT_TOLERANCE {
        return Err(ExperimentError::FitDiverged {
            what: "ja".into(),
            diagnostics: format!(
                "relative residuals Mr {:.3e}, Hc {:.3e}, tip at {:.3} Ms",
                fit.mr_residual, fit.hc_residual, fit.tip_fraction
            ),
        });
    }
    rep.material = fit.material;
    let m = fit.material;
    if let Some(br) = anchors.br {
        let model = MU0 * m.mr() * (1.0 + fit.mr_residual);
        rep.residuals
            .push(Residual::new("Br_T", br, model, FIT_TOLERANCE * br));
    }
    if let Some(bs) = anchors.bs {
        rep.residuals
            .push(Residual::new("Bs_T", bs, MU0 * m.ms, FIT_TOLERANCE * bs));
    }
    if let Some(hc) = anchors.hc {
        let model = m.hc * (1.0 + fit.hc_residual);
        rep.residuals
            .push(Residual::new("Hc_A_per_m", hc, model, FIT_TOLERANCE * hc));
    }
    rep.mark_fitted("ja");
    Ok(())
}

fn speed(rep: &CalibrationReport, timing: &StepTiming, mode: ModeName, s: Surface) -> f64 {
    predict_speed(
        &DriveMode::from_name(mode),
        s,
        timing,
        rep.coil_resistance,
        &rep.bank(),
    )
    .expect("built-in modes are valid")
}

/// Settle time per surface from the fastest anchors (stable ones when a
/// surface has no fastest anchor), then the engage time from the enhanced anchors.
fn fit_speeds(anchors: &AnchorSet, rep: &mut CalibrationReport) -> Result<()> {
    for a in &anchors.speeds {
        if !(a.mm_s > 0.0) || !a.mm_s.is_finite() {
            return Err(ExperimentError::FitDiverged {
                what: "speeds".into(),
                diagnostics: format!("speed anchor {a:?} is not positive"),
            });
        }
    }
    let mut timing = rep.timing;
    for (j, &s) in Surface::ALL.iter().enumerate() {
        let speed_at = |settle: f64, mode: ModeName| {
            let mut t = timing;
            t.settle[j] = settle;
            speed(rep, &t, mode, s)
        };
        // Fastest-mode steps are recharge plus settle, so that anchor pins the
        // settle time. Stable anchors only enter the fit when it is missing.
        let fastest = anchors
            .speeds
            .iter()
            .find(|a| a.surface == s && a.mode == ModeName::Fastest);
        if let Some(a) = fastest {
            timing.settle[j] = bisect_decreasing(|x| speed_at(x, ModeName::Fastest), a.mm_s, 0.0, MAX_SETTLE);
        } else {
            let here: Vec<&SpeedAnchor> = anchors
                .speeds
                .iter()
                .filter(|a| a.surface == s && a.mode == ModeName::Stable)
                .collect();
            if here.is_empty() {
                continue;
            }
            let cost = |settle: f64| {
                here.iter()
                    .map(|a| (speed_at(settle, a.mode) - a.mm_s).powi(2))
                    .sum::<f64>()
            };
            timing.settle[j] = golden(cost, 0.0, MAX_SETTLE);
        }
        rep.mark_fitted(&format!("settle_{}", s.name()));
    }
    let enhanced: Vec<&SpeedAnchor> = anchors
        .speeds
        .iter()
        .filter(|a| a.mode == ModeName::Enhanced)
        .collect();
    if !enhanced.is_empty() {
        let cost = |engage: f64| {
            let mut t = timing;
            t.engage_time = engage;
            enhanced
                .iter()
                .map(|a| (speed(rep, &t, a.mode, a.surface) - a.mm_s).powi(2))
                .sum::<f64>()
        };
        timing.engage_time = golden(cost, 0.0, MAX_SETTLE);
        rep.mark_fitted("engage_time");
    }
    rep.timing = timing;

    // Anchors faster than the timing model allows with zero settle time.
    for a in &anchors.speeds {
        let mut t = timing;
        t.settle = [0.0; 4];
        t.engage_time = 0.0;
        let reach = speed(rep, &t, a.mode, a.surface);
        if a.mm_s > reach {
            rep.flags.push(format!(
                "speed anchor {} on {} ({} mm/s) exceeds the model limit {reach:.3} mm/s",
                a.mode, a.surface, a.mm_s
            ));
        }
        let model = speed(rep, &timing, a.mode, a.surface);
        rep.residuals.push(Residual::new(
            format!("speed_{}_{}_mm_s", a.mode, a.surface),
            a.mm_s,
            model,
            SPEED_TOLERANCE,
        ));
    }
    for mode in ModeName::ALL {
        let v: Vec<f64> = Surface::ALL
            .iter()
            .map(|&s| speed(rep, &timing, mode, s))
            .collect();
        let spread = v.iter().cloned().fold(f64::MIN, f64::max)
            - v.iter().cloned().fold(f64::MAX, f64::min);
        if spread > SPEED_TOLERANCE {
            rep.flags.push(format!(
                "{mode} speeds spread {spread:.3} mm/s across surfaces"
            ));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JaFit {
    pub material: MaterialParams,
    pub mr_residual: f64,
    pub hc_residual: f64,
    pub tip_fraction: f64,
}

fn ja_residuals(m: &MaterialParams, tip: f64, dh: f64) -> Option<([f64; 2], f64)> {
    let lm = major_loop_metrics(m, tip, dh).ok()?;
    let hc = lm.hc?;
    Some(([(lm.mr - m.mr()) / m.mr(), (hc - m.hc) / m.hc], lm.tip_m / m.ms))
}

fn with_params(base: &MaterialParams, p: [f64; 2]) -> MaterialParams {
    let mut m = *base;
    m.k = p[0].exp();
    m.alpha = p[1] * 3.0 * m.a / m.ms;
    m
}

/// Levenberg-Marquardt fit of (k, alpha) so the major loop with peak
/// `tip_factor`·Hc passes through (0, Mr) and (-Hc, 0).
pub fn fit_ja(
    base: &MaterialParams,
    tip_factor: f64,
    cfg: &SolverConfig,
    seed: u64,
    starts: usize,
) -> Option<JaFit> {
    let tip = tip_factor * base.hc;
    let dh = cfg.dh_max(base);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p0 = [base.k.ln(), base.coupling_ratio()];
    let mut best: Option<([f64; 2], f64)> = None;
    for s in 0..starts {
        let mut p = if s == 0 {
            p0
        } else {
            [p0[0] + rng.gen_range(-0.2..0.2), p0[1] * rng.gen_range(0.8..1.2)]
        };
        let Some((mut r, _)) = ja_residuals(&with_params(base, p), tip, dh) else {
            continue;
        };
        let mut cost = r[0] * r[0] + r[1] * r[1];
        let mut lambda = 1e-3;
        for _ in 0..100 {
            if cost < 1e-24 {
                break;
            }
            let mut jac = [[0.0; 2]; 2];
            let mut ok = true;
            for j in 0..2 {
                let h = 1e-6 * p[j].abs().max(1e-3);
                let mut q = p;
                q[j] += h;
                match ja_residuals(&with_params(base, q), tip, dh) {
                    Some((rq, _)) => {
                        jac[0][j] = (rq[0] - r[0]) / h;
                        jac[1][j] = (rq[1] - r[1]) / h;
                    }
                    None => ok = false,
                }
            }
            if !ok {
                break;
            }
            let mut improved = false;
            for _ in 0..20 {
                let a00 = jac[0][0] * jac[0][0] + jac[1][0] * jac[1][0];
                let a01 = jac[0][0] * jac[0][1] + jac[1][0] * jac[1][1];
                let a11 = jac[0][1] * jac[0][1] + jac[1][1] * jac[1][1];
                let g0 = jac[0][0] * r[0] + jac[1][0] * r[1];
                let g1 = jac[0][1] * r[0] + jac[1][1] * r[1];
                let (b00, b11) = (a00 * (1.0 + lambda), a11 * (1.0 + lambda));
                let det = b00 * b11 - a01 * a01;
                let d0 = -(b11 * g0 - a01 * g1) / det;
                let d1 = -(b00 * g1 - a01 * g0) / det;
                let q = [p[0] + d0, p[1] + d1];
                if let Some((rq, _)) = ja_residuals(&with_params(base, q), tip, dh) {
                    let cq = rq[0] * rq[0] + rq[1] * rq[1];
                    if cq < cost {
                        p = q;
                        r = rq;
                        cost = cq;
                        lambda = (lambda * 0.3).max(1e-9);
                        improved = true;
                        break;
                    }
                }
                lambda *= 10.0;
            }
            if !improved {
                break;
            }
        }
        if best.map_or(true, |(_, c)| cost < c) {
            best = Some((p, cost));
        }
    }
    let (p, _) = best?;
    let material = with_params(base, p);
    let (r, tip_fraction) = ja_residuals(&material, tip, dh)?;
    Some(JaFit {
        material,
        mr_residual: r[0],
        hc_residual: r[1],
        tip_fraction,
    })
}
