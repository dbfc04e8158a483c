//! Command-line front end.
//!
//! Every subcommand writes its CSV into `--out` (default `out/`) together with
//! a `<name>.meta.toml` sidecar holding the resolved settings, so any output
//! can be regenerated. Settings come from an optional `--config` TOML file and
//! flags override it:
//!
//! ```toml
//! preset = "table1"            # table1 | datasheet
//! seed = 7
//! out = "results"
//! calibration = "results/calibration.toml"
//!
//! [material]                   # any subset, replaces preset constants
//! ms = 159154.9
//! a = 2000.0
//! k = 70511.37
//! c = 0.01
//! alpha = -1.5655
//! hc = 48000.0
//! br = 0.03
//!
//! [hysteresis]
//! tip_hc = 5.0
//! cycles = 2
//! points = 200                 # samples per branch
//!
//! [sweep]                      # shared by sweep-pulse, sweep-turns, coverage
//! turns = 250
//! coil_length_mm = 8.0
//! peak_current = 20.0
//!
//! [sweep_pulse]
//! min = 0.0
//! max = 30.0
//! steps = 31
//!
//! [sweep_turns]
//! min = 0.0
//! max = 500.0
//! steps = 51
//!
//! [holding]
//! max_voltage = 16.0
//! voltage_step = 1.0
//! max_pulses = 8
//!
//! [lint]
//! dead_time_s = 1e-5
//! ```
//!
//! Exit codes: 0 success, 1 invalid input, 2 model failure (stall, diverged
//! fit, incomplete switch). Failures print one line to standard error:
//! `error kind=<kind> exit=<code> message="<text>"`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{error::ErrorKind, Parser, Subcommand};
use serde::Deserialize;

use crate::actuator::{ActuatorError, MotorDrive};
use crate::constants::MU0;
use crate::experiments::{
    calibrate, coverage_study, holding_force_grid, speed_table, sweep_pulse_peak, sweep_turns,
    write_csv, write_meta, AnchorSet, CalibrationReport, ExperimentError, RunMeta, SweepContext,
    SweepSpec, TABLE_MODES,
};
use crate::magnetics::{ja_trace, JaState, MagneticsError, MaterialParams, SolverConfig};
use crate::power::{build_multiplex, validate_schedule, DeadTimeConfig, GateSchedule, PowerError, Violation};
use crate::world::{write_trace_csv, HoldingModel, Scenario, WorldError};
use crate::Surface;

const DEFAULT_SEED: u64 = 1;
const DEFAULT_OUT: &str = "out";

#[derive(Debug, Parser)]
#[command(name = "dili", version, about = "SEP actuator and DILI robot simulator")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// TOML settings file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Material preset: table1 or datasheet.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Calibration report written by `calibrate`.
    #[arg(long, global = true)]
    pub calibration: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Major hysteresis loop trace of one segment.
    Hysteresis {
        /// Loop tip in units of Hc.
        #[arg(long)]
        tip_hc: Option<f64>,
        #[arg(long)]
        cycles: Option<usize>,
        /// Samples per branch.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Remanent flux against pulse peak current.
    SweepPulse {
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        coil: CoilArgs,
    },
    /// Drive field and remanent flux against coil turns.
    SweepTurns {
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        coil: CoilArgs,
    },
    /// Remanence profile along the rod for three coil wrappings.
    Coverage {
        #[command(flatten)]
        coil: CoilArgs,
    },
    /// Motor speed per mode and surface.
    SpeedTest,
    /// Holding force over bank voltage and pulse count.
    HoldingForce {
        #[arg(long)]
        max_voltage: Option<f64>,
        #[arg(long)]
        voltage_step: Option<f64>,
        #[arg(long)]
        max_pulses: Option<u32>,
    },
    /// Runs a robot scenario file and writes its trace.
    RunScenario { file: PathBuf },
    /// Checks a gate schedule text file for shoot-through and multiplex conflicts.
    LintSchedule {
        file: PathBuf,
        /// Required dead time between the switches of one half-bridge (s).
        #[arg(long)]
        dead_time: Option<f64>,
    },
    /// Fits the free constants to the published anchors.
    Calibrate,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct RangeArgs {
    #[arg(long)]
    pub min: Option<f64>,
    #[arg(long)]
    pub max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct CoilArgs {
    #[arg(long)]
    pub turns: Option<u32>,
    #[arg(long)]
    pub coil_length_mm: Option<f64>,
    #[arg(long)]
    pub peak_current: Option<f64>,
}

/// Contents of the `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub calibration: Option<PathBuf>,
    #[serde(default)]
    pub material: MaterialOverrides,
    #[serde(default)]
    pub hysteresis: HysteresisSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub sweep_pulse: RangeSection,
    #[serde(default)]
    pub sweep_turns: RangeSection,
    #[serde(default)]
    pub holding: HoldingSection,
    #[serde(default)]
    pub lint: LintSection,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialOverrides {
    pub ms: Option<f64>,
    pub a: Option<f64>,
    pub k: Option<f64>,
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub hc: Option<f64>,
    pub br: Option<f64>,
}

impl MaterialOverrides {
    fn is_empty(&self) -> bool {
        [self.ms, self.a, self.k, self.c, self.alpha, self.hc, self.br]
            .iter()
            .all(Option::is_none)
    }

    fn apply(&self, m: MaterialParams) -> Result<MaterialParams, CliError> {
        let out = MaterialParams {
            ms: self.ms.unwrap_or(m.ms),
            a: self.a.unwrap_or(m.a),
            k: self.k.unwrap_or(m.k),
            c: self.c.unwrap_or(m.c),
            alpha: self.alpha.unwrap_or(m.alpha),
            hc: self.hc.unwrap_or(m.hc),
            br: self.br.unwrap_or(m.br),
        };
        out.validate()?;
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HysteresisSection {
    pub tip_hc: Option<f64>,
    pub cycles: Option<usize>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub turns: Option<u32>,
    pub coil_length_mm: Option<f64>,
    pub peak_current: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSection {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoldingSection {
    pub max_voltage: Option<f64>,
    pub voltage_step: Option<f64>,
    pub max_pulses: Option<u32>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LintSection {
    pub dead_time_s: Option<f64>,
}

/// Resolved settings shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub preset: String,
    pub seed: u64,
    pub out: PathBuf,
    pub calibration: Option<CalibrationReport>,
    pub calibration_path: Option<PathBuf>,
    pub config_path: Option<PathBuf>,
    pub file: ConfigFile,
}

impl RunConfig {
    /// Material for `self.preset`: calibrated constants when a matching
    /// report was given, then any `[material]` overrides.
    fn material(&self) -> Result<MaterialParams, CliError> {
        let base = match &self.calibration {
            Some(r) if r.preset == self.preset => r.material,
            _ => MaterialParams::preset(&self.preset)?,
        };
        self.file.material.apply(base)
    }

    fn meta(&self, command: &str) -> RunMeta {
        let mut m = RunMeta::new(command, &self.preset, self.seed);
        if let Some(p) = &self.config_path {
            m = m.param("config", p.display());
        }
        if let Some(p) = &self.calibration_path {
            m = m.param("calibration_file", p.display());
        }
        if !self.file.material.is_empty() {
            if let Ok(mat) = self.material() {
                m = m
                    .param("material.ms", mat.ms)
                    .param("material.a", mat.a)
                    .param("material.k", mat.k)
                    .param("material.c", mat.c)
                    .param("material.alpha", mat.alpha)
                    .param("material.hc", mat.hc)
                    .param("material.br", mat.br);
            }
        }
        m.calibration = self.calibration.clone();
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad input: flags, files, parameters. Exit 1.
    Validation { kind: String, message: String },
    /// The simulation itself failed. Exit 2.
    Model { kind: String, message: String },
}

impl CliError {
    fn validation(kind: &str, message: impl ToString) -> Self {
        CliError::Validation {
            kind: kind.into(),
            message: message.to_string(),
        }
    }

    fn model(kind: &str, message: impl ToString) -> Self {
        CliError::Model {
            kind: kind.into(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 1,
            CliError::Model { .. } => 2,
        }
    }

    /// Machine-readable stderr line.
    pub fn line(&self) -> String {
        let (kind, message) = match self {
            CliError::Validation { kind, message } | CliError::Model { kind, message } => {
                (kind, message)
            }
        };
        format!(
            "error kind={kind} exit={} message={message:?}",
            self.exit_code()
        )
    }
}

impl From<MagneticsError> for CliError {
    fn from(e: MagneticsError) -> Self {
        match e {
            MagneticsError::DemagnetizationFailed { .. } => {
                CliError::model("demagnetization-failed", e)
            }
            _ => CliError::validation("invalid-parameter", e),
        }
    }
}

impl From<PowerError> for CliError {
    fn from(e: PowerError) -> Self {
        match e {
            PowerError::Parse { .. } => CliError::validation("parse", e),
            PowerError::InsufficientVoltage { .. } => CliError::model("insufficient-voltage", e),
            _ => CliError::validation("invalid-parameter", e),
        }
    }
}

impl From<ActuatorError> for CliError {
    fn from(e: ActuatorError) -> Self {
        match e {
            ActuatorError::Stall { .. } => CliError::model("stall", e),
            ActuatorError::IncompleteSwitch { .. } => CliError::model("incomplete-switch", e),
            ActuatorError::NotAtEquilibrium { .. } => CliError::model("not-at-equilibrium", e),
            ActuatorError::Magnetics(m) => m.into(),
            ActuatorError::Power(p) => p.into(),
            _ => CliError::validation("invalid-parameter", e),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::FitDiverged { .. } => CliError::model("fit-diverged", e),
            ExperimentError::Io(_) => CliError::validation("io", e),
            ExperimentError::Magnetics(m) => m.into(),
            ExperimentError::Actuator(a) => a.into(),
            ExperimentError::CalibrationMissing => CliError::validation("calibration-missing", e),
            _ => CliError::validation("invalid-parameter", e),
        }
    }
}

impl From<WorldError> for CliError {
    fn from(e: WorldError) -> Self {
        match e {
            WorldError::Actuator(a) => a.into(),
            WorldError::NoMotorContact(_) => CliError::model("no-motor-contact", e),
            WorldError::Collision(..) => CliError::model("collision", e),
            WorldError::ConnectionTooWeak { .. } => CliError::model("connection-too-weak", e),
            WorldError::Scenario(_) => CliError::validation("scenario", e),
            _ => CliError::validation("invalid-motion", e),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::validation("io", format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    let err = CliError::validation(
                        "usage",
                        e.kind().as_str().unwrap_or("missing subcommand or arguments"),
                    );
                    eprintln!("{}", err.line());
                    err.exit_code()
                }
            };
        }
    };
    match run(cli) {
        Ok(written) => {
            for p in written {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{}", e.line());
            e.exit_code()
        }
    }
}

fn default_preset(cmd: &Command) -> &'static str {
    match cmd {
        Command::Hysteresis { .. }
        | Command::SweepPulse { .. }
        | Command::SweepTurns { .. }
        | Command::Coverage { .. }
        | Command::Calibrate => "table1",
        _ => "datasheet",
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let file: ConfigFile = match &cli.config {
        Some(p) => toml::from_str(&read(p)?).map_err(|e| io_err(p, e))?,
        None => ConfigFile::default(),
    };
    let preset = cli
        .preset
        .clone()
        .or_else(|| file.preset.clone())
        .unwrap_or_else(|| default_preset(&cli.command).into());
    MaterialParams::preset(&preset)?;
    let calibration_path = cli.calibration.clone().or_else(|| file.calibration.clone());
    let calibration = match &calibration_path {
        Some(p) => Some(CalibrationReport::from_toml(&read(p)?).map_err(|e| io_err(p, e))?),
        None => None,
    };
    Ok(RunConfig {
        preset,
        seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        out: cli
            .out
            .clone()
            .or_else(|| file.out.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        calibration,
        calibration_path,
        config_path: cli.config.clone(),
        file,
    })
}

/// Runs a parsed command and returns the files written.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = resolve(&cli)?;
    if !matches!(cli.command, Command::LintSchedule { .. }) {
        fs::create_dir_all(&cfg.out).map_err(|e| io_err(&cfg.out, e))?;
    }
    match &cli.command {
        Command::Hysteresis {
            tip_hc,
            cycles,
            points,
        } => hysteresis(&cfg, *tip_hc, *cycles, *points),
        Command::SweepPulse { range, coil } => sweep_pulse(&cfg, range, coil),
        Command::SweepTurns { range, coil } => sweep_turns_cmd(&cfg, range, coil),
        Command::Coverage { coil } => coverage(&cfg, coil),
        Command::SpeedTest => speed_test(&cfg),
        Command::HoldingForce {
            max_voltage,
            voltage_step,
            max_pulses,
        } => holding(&cfg, *max_voltage, *voltage_step, *max_pulses),
        Command::RunScenario { file } => run_scenario(&cfg, file),
        Command::LintSchedule { file, dead_time } => lint(&cfg, file, *dead_time),
        Command::Calibrate => calibrate_cmd(&cfg),
    }
}

fn f(x: f64) -> String {
    format!("{x}")
}

fn emit(
    cfg: &RunConfig,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
    meta: &RunMeta,
) -> Result<Vec<PathBuf>, CliError> {
    let path = cfg.out.join(name);
    write_csv(&path, header, rows)?;
    let sidecar = write_meta(&path, meta)?;
    Ok(vec![path, sidecar])
}

fn hysteresis(
    cfg: &RunConfig,
    tip_hc: Option<f64>,
    cycles: Option<usize>,
    points: Option<usize>,
) -> Result<Vec<PathBuf>, CliError> {
    let sec = cfg.file.hysteresis;
    let tip_hc = tip_hc.or(sec.tip_hc).unwrap_or(5.0);
    let cycles = cycles.or(sec.cycles).unwrap_or(2);
    let points = points.or(sec.points).unwrap_or(200);
    if !(tip_hc > 0.0) || !tip_hc.is_finite() || cycles == 0 || points < 2 {
        return Err(CliError::validation(
            "invalid-parameter",
            "hysteresis needs tip_hc > 0, cycles >= 1 and points >= 2",
        ));
    }
    let mat = cfg.material()?;
    let solver = SolverConfig::default();
    let tip = tip_hc * mat.hc;
    let ramp = |from: f64, to: f64| -> Vec<f64> {
        (1..=points)
            .map(|i| from + (to - from) * i as f64 / points as f64)
            .collect()
    };
    let mut branches: Vec<(String, Vec<f64>)> = vec![("initial".into(), ramp(0.0, tip))];
    for c in 1..=cycles {
        branches.push((format!("descending_{c}"), ramp(tip, -tip)));
        branches.push((format!("ascending_{c}"), ramp(-tip, tip)));
    }
    let mut state = JaState::DEMAGNETIZED;
    let mut rows = vec![vec!["initial".into(), f(0.0), f(0.0), f(0.0)]];
    for (name, fields) in &branches {
        let (next, ms) = ja_trace(&mat, state, fields, solver.dh_max(&mat))?;
        state = next;
        for (h, m) in fields.iter().zip(ms) {
            rows.push(vec![name.clone(), f(*h), f(m), f(MU0 * (h + m))]);
        }
    }
    let meta = cfg
        .meta("hysteresis")
        .param("tip_hc", tip_hc)
        .param("cycles", cycles)
        .param("points", points);
    emit(
        cfg,
        "hysteresis.csv",
        &["branch", "h_A_per_m", "m_A_per_m", "b_T"],
        &rows,
        &meta,
    )
}

fn sweep_context(cfg: &RunConfig, coil: &CoilArgs) -> Result<SweepContext, CliError> {
    let sec = cfg.file.sweep;
    let mut ctx = SweepContext {
        preset: cfg.preset.clone(),
        ..SweepContext::default()
    };
    ctx.material = Some(cfg.material()?);
    if let Some(n) = coil.turns.or(sec.turns) {
        ctx.turns = n;
    }
    if let Some(l) = coil.coil_length_mm.or(sec.coil_length_mm) {
        ctx.coil_length = l * 1e-3;
    }
    if let Some(i) = coil.peak_current.or(sec.peak_current) {
        ctx.peak_current = i;
    }
    Ok(ctx)
}

fn apply_range(spec: &mut SweepSpec, range: &RangeArgs, sec: RangeSection) {
    if let Some(v) = range.min.or(sec.min) {
        spec.min = v;
    }
    if let Some(v) = range.max.or(sec.max) {
        spec.max = v;
    }
    if let Some(v) = range.steps.or(sec.steps) {
        spec.steps = v;
    }
}

fn sweep_meta(cfg: &RunConfig, command: &str, spec: &SweepSpec) -> RunMeta {
    cfg.meta(command)
        .param("min", spec.min)
        .param("max", spec.max)
        .param("steps", spec.steps)
        .param("turns", spec.context.turns)
        .param("coil_length_m", spec.context.coil_length)
        .param("peak_current_A", spec.context.peak_current)
}

fn sweep_pulse(
    cfg: &RunConfig,
    range: &RangeArgs,
    coil: &CoilArgs,
) -> Result<Vec<PathBuf>, CliError> {
    let mut spec = SweepSpec::pulse_peak();
    spec.context = sweep_context(cfg, coil)?;
    apply_range(&mut spec, range, cfg.file.sweep_pulse);
    let points = sweep_pulse_peak(&spec)?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| vec![f(p.peak_current), f(p.b_center), f(p.b_average)])
        .collect();
    emit(
        cfg,
        "sweep_pulse.csv",
        &["peak_current_A", "b_center_T", "b_average_T"],
        &rows,
        &sweep_meta(cfg, "sweep-pulse", &spec),
    )
}

fn sweep_turns_cmd(
    cfg: &RunConfig,
    range: &RangeArgs,
    coil: &CoilArgs,
) -> Result<Vec<PathBuf>, CliError> {
    let mut spec = SweepSpec::turns();
    spec.context = sweep_context(cfg, coil)?;
    apply_range(&mut spec, range, cfg.file.sweep_turns);
    let points = sweep_turns(&spec)?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                p.turns.to_string(),
                f(p.h_center),
                f(p.b_center_pulse),
                f(p.b_average_pulse),
                f(p.b_center),
                f(p.b_average),
            ]
        })
        .collect();
    emit(
        cfg,
        "sweep_turns.csv",
        &[
            "turns",
            "h_center_A_per_m",
            "b_center_pulse_T",
            "b_average_pulse_T",
            "b_center_T",
            "b_average_T",
        ],
        &rows,
        &sweep_meta(cfg, "sweep-turns", &spec),
    )
}

fn coverage(cfg: &RunConfig, coil: &CoilArgs) -> Result<Vec<PathBuf>, CliError> {
    let ctx = sweep_context(cfg, coil)?;
    let profiles = coverage_study(&ctx)?;
    let mut rows = Vec::new();
    for p in &profiles {
        for (z, m) in p.z.iter().zip(&p.m_fraction) {
            rows.push(vec![
                p.wrapping.name().to_string(),
                f(p.coil_length),
                f(p.h_center),
                f(*z),
                f(*m),
            ]);
        }
    }
    let meta = cfg
        .meta("coverage")
        .param("turns", ctx.turns)
        .param("peak_current_A", ctx.peak_current);
    emit(
        cfg,
        "coverage.csv",
        &["wrapping", "coil_length_m", "h_center_A_per_m", "z_m", "m_over_ms"],
        &rows,
        &meta,
    )
}

/// The calibration given on the command line, or a fresh fit to the published anchors.
fn calibration_or_fit(cfg: &RunConfig) -> Result<CalibrationReport, CliError> {
    match &cfg.calibration {
        Some(r) => Ok(r.clone()),
        None => Ok(calibrate(&AnchorSet::published(), cfg.seed, None)?),
    }
}

fn speed_test(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let report = calibration_or_fit(cfg)?;
    let table = speed_table(Some(&report))?;
    let mut header = vec!["mode"];
    header.extend(Surface::ALL.iter().map(|s| s.name()));
    let rows: Vec<Vec<String>> = TABLE_MODES
        .iter()
        .zip(&table.cells)
        .map(|(m, row)| {
            std::iter::once(m.name().to_string())
                .chain(row.iter().map(|v| f(*v)))
                .collect()
        })
        .collect();
    let mut meta = cfg.meta("speed-test").param("unit", "mm/s");
    meta.calibration = Some(report);
    emit(cfg, "speed_test.csv", &header, &rows, &meta)
}

fn holding(
    cfg: &RunConfig,
    max_voltage: Option<f64>,
    voltage_step: Option<f64>,
    max_pulses: Option<u32>,
) -> Result<Vec<PathBuf>, CliError> {
    let sec = cfg.file.holding;
    let vmax = max_voltage.or(sec.max_voltage).unwrap_or(16.0);
    let step = voltage_step.or(sec.voltage_step).unwrap_or(1.0);
    let nmax = max_pulses.or(sec.max_pulses).unwrap_or(8);
    if !(vmax >= 0.0) || !(step > 0.0) || !vmax.is_finite() || nmax == 0 {
        return Err(CliError::validation(
            "invalid-parameter",
            "holding-force needs max_voltage >= 0, voltage_step > 0, max_pulses >= 1",
        ));
    }
    let n_v = (vmax / step + 1e-9).floor() as usize;
    let voltages: Vec<f64> = (0..=n_v).map(|i| i as f64 * step).collect();
    let counts: Vec<u32> = (1..=nmax).collect();
    let model = match &cfg.calibration {
        Some(r) => r.holding_model(),
        None => HoldingModel::module_default(),
    };
    let grid = holding_force_grid(&model, &voltages, &counts)?;
    let names: Vec<String> = counts.iter().map(|n| format!("pulses_{n}_mN")).collect();
    let mut header = vec!["voltage_V"];
    header.extend(names.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = grid
        .voltages
        .iter()
        .zip(&grid.force_mn)
        .map(|(v, row)| {
            std::iter::once(f(*v))
                .chain(row.iter().map(|x| f(*x)))
                .collect()
        })
        .collect();
    let meta = cfg
        .meta("holding-force")
        .param("max_voltage", vmax)
        .param("voltage_step", step)
        .param("max_pulses", nmax)
        .param("effective_gap_m", model.effective_gap);
    emit(cfg, "holding_force.csv", &header, &rows, &meta)
}

fn run_scenario(cfg: &RunConfig, file: &Path) -> Result<Vec<PathBuf>, CliError> {
    let scenario = Scenario::parse(&read(file)?)?;
    let mut drive = MotorDrive::module_default()?;
    if let Some(r) = &cfg.calibration {
        drive.timing = r.timing;
    }
    let mut world = scenario.build_world(drive)?;
    let outcome = scenario.run(&mut world);

    // The trace up to a failing action is still written.
    let stem = file
        .file_stem()
        .map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
    let path = cfg.out.join(format!("{stem}_trace.csv"));
    let out = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
    write_trace_csv(out, &world.trace).map_err(|e| io_err(&path, e))?;
    let mut meta = cfg
        .meta("run-scenario")
        .param("scenario", file.display())
        .param("energy_pulse_J", world.energy.pulse_total())
        .param("energy_continuous_J", world.energy.continuous_total())
        .param("end_time_s", world.time);
    for (id, m) in &world.modules {
        meta = meta.param(&format!("module_{id}_pose_mm"), format!("{},{}", m.pose.x(), m.pose.y()));
    }
    let sidecar = write_meta(&path, &meta)?;
    outcome?;
    Ok(vec![path, sidecar])
}

fn lint(cfg: &RunConfig, file: &Path, dead_time: Option<f64>) -> Result<Vec<PathBuf>, CliError> {
    let sched = GateSchedule::parse(&read(file)?)?;
    let dt = DeadTimeConfig::new(dead_time.or(cfg.file.lint.dead_time_s).unwrap_or(1e-5))?;
    let report = validate_schedule(&sched, &build_multiplex(), &dt);
    if report.is_ok() {
        println!("ok {} events", sched.len());
        return Ok(Vec::new());
    }
    for v in &report.violations {
        println!("{v}");
    }
    let mut kinds: BTreeMap<&str, usize> = BTreeMap::new();
    for v in &report.violations {
        *kinds.entry(v.kind()).or_default() += 1;
    }
    let summary: Vec<String> = kinds.iter().map(|(k, n)| format!("{k} x{n}")).collect();
    let first = match report.violations[0] {
        Violation::ShootThrough { .. } => "shoot-through",
        Violation::MultiplexConflict { .. } => "multiplex-conflict",
    };
    Err(CliError::validation(first, summary.join(", ")))
}

fn calibrate_cmd(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let mut anchors = AnchorSet::published();
    if cfg.preset != anchors.preset {
        let m = MaterialParams::preset(&cfg.preset)?;
        anchors.preset = cfg.preset.clone();
        anchors.br = Some(m.br);
        anchors.bs = Some(m.bs());
        anchors.hc = Some(m.hc);
    }
    let report = calibrate(&anchors, cfg.seed, cfg.calibration.as_ref())?;
    for flag in &report.flags {
        eprintln!("flag {flag}");
    }
    let toml_path = cfg.out.join("calibration.toml");
    fs::write(&toml_path, report.to_toml()?).map_err(|e| io_err(&toml_path, e))?;
    let rows: Vec<Vec<String>> = report
        .residuals
        .iter()
        .map(|r| {
            vec![
                r.anchor.clone(),
                f(r.target),
                f(r.model),
                f(r.tolerance),
                r.within.to_string(),
            ]
        })
        .collect();
    let mut meta = cfg.meta("calibrate");
    meta.calibration = Some(report);
    let mut written = emit(
        cfg,
        "calibration_residuals.csv",
        &["anchor", "target", "model", "tolerance", "within"],
        &rows,
        &meta,
    )?;
    written.insert(0, toml_path);
    Ok(written)
}
