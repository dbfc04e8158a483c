//! Planar multi-module world: poses, face states, connections, sliding and
//! the push / pull / carry composites.

mod holding;
mod motion;
mod scenario;

pub use holding::{
    gap_for_force, holding_force, HoldingModel, HOLDING_ANCHOR_MN, HOLDING_ANCHOR_VOLTAGE,
    SATURATION_PULSES,
};
pub use motion::{CompositeKind, CompositeMotion, Heading, MotionReport};
pub use scenario::{write_trace_csv, Action, ActionKind, Scenario, ScenarioConnection, ScenarioModule};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actuator::{equilibrium_um, ActuatorError, MotorDrive};
use crate::constants::{GRAVITY, MODULE_MASS, MODULE_SIDE_UM, STEP_UM};
use crate::power::CapacitorBank;
use crate::Surface;

pub type ModuleId = u32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("module {0} has no neighbour forming a linear motor along the motion")]
    NoMotorContact(ModuleId),
    #[error("modules {0} and {1} would overlap")]
    Collision(ModuleId, ModuleId),
    #[error("connection holds {holding_mn:.3} mN but the carry needs {demand_mn:.3} mN")]
    ConnectionTooWeak { holding_mn: f64, demand_mn: f64 },
    #[error("unknown module {0}")]
    UnknownModule(ModuleId),
    #[error("module {0} already exists")]
    DuplicateModule(ModuleId),
    #[error("modules {0} and {1} are not face-adjacent")]
    NotAdjacent(ModuleId, ModuleId),
    #[error("invalid motion: {0}")]
    InvalidMotion(String),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Actuator(#[from] ActuatorError),
}

pub type Result<T> = std::result::Result<T, WorldError>;

/// Fixed build figures of a module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModuleSpec {
    /// m
    pub side: f64,
    /// kg
    pub mass: f64,
    pub sep_count: u32,
    pub ndfeb_count: u32,
    pub work_faces: u32,
    /// m
    pub sep_diameter: f64,
    /// m
    pub sep_length: f64,
    pub coil_turns: u32,
    /// m
    pub wire_diameter: f64,
    /// m
    pub ndfeb_diameter: f64,
    /// m
    pub ndfeb_length: f64,
}

impl Default for ModuleSpec {
    fn default() -> Self {
        Self {
            side: MODULE_SIDE_UM as f64 * 1e-6,
            mass: MODULE_MASS,
            sep_count: 6,
            ndfeb_count: 4,
            work_faces: 4,
            sep_diameter: 2.5e-3,
            sep_length: 8e-3,
            coil_turns: 250,
            wire_diameter: 0.15e-3,
            ndfeb_diameter: 2e-3,
            ndfeb_length: 1.5e-3,
        }
    }
}

/// Planar pose in integer micrometres plus a quarter-turn count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x_um: i64,
    pub y_um: i64,
    /// Counter-clockwise quarter turns, 0..4.
    pub quarter_turns: u8,
}

impl Pose {
    pub fn new(x_um: i64, y_um: i64) -> Self {
        Self {
            x_um,
            y_um,
            quarter_turns: 0,
        }
    }

    pub fn x(&self) -> f64 {
        self.x_um as f64 * 1e-6
    }

    pub fn y(&self) -> f64 {
        self.y_um as f64 * 1e-6
    }

    /// World axis (0 = x, 1 = y) and sign as seen in the module frame.
    pub(crate) fn to_local(&self, axis: usize, sign: i64) -> (usize, i64) {
        let q = self.quarter_turns % 4;
        // Rotating a world unit vector by -q quarter turns.
        let (mut vx, mut vy) = if axis == 0 { (sign, 0) } else { (0, sign) };
        for _ in 0..q {
            (vx, vy) = (vy, -vx);
        }
        if vx != 0 {
            (0, vx)
        } else {
            (1, vy)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Module {
    pub id: ModuleId,
    pub pose: Pose,
    /// SEP polarities of the faces that slide along local x (index 0) and
    /// along local y (index 1). Opposite faces share their through-hole SEPs.
    pub face_polarities: [[i8; 3]; 2],
    /// Every work face carries its two NdFeB magnets.
    pub ndfeb_present: [bool; 4],
    pub bank: CapacitorBank,
    /// kg
    pub mass: f64,
}

impl Module {
    pub fn new(id: ModuleId, pose: Pose) -> Self {
        Self {
            id,
            pose,
            face_polarities: [[0; 3]; 2],
            ndfeb_present: [true; 4],
            bank: CapacitorBank::module_default(),
            mass: MODULE_MASS,
        }
    }

    pub fn overlaps(&self, other: &Module) -> bool {
        (self.pose.x_um - other.pose.x_um).abs() < MODULE_SIDE_UM
            && (self.pose.y_um - other.pose.y_um).abs() < MODULE_SIDE_UM
    }

    /// Axis (0 = x, 1 = y) and side of a shared face, if the footprints touch
    /// along a face with positive overlap.
    pub fn contact(&self, other: &Module) -> Option<(usize, i64)> {
        let dx = other.pose.x_um - self.pose.x_um;
        let dy = other.pose.y_um - self.pose.y_um;
        if dx.abs() == MODULE_SIDE_UM && dy.abs() < MODULE_SIDE_UM {
            Some((0, dx.signum()))
        } else if dy.abs() == MODULE_SIDE_UM && dx.abs() < MODULE_SIDE_UM {
            Some((1, dy.signum()))
        } else {
            None
        }
    }
}

/// Electrical energy drawn from module banks (J).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub pulses: Vec<f64>,
    /// Continuous-current energy per enhanced step.
    pub continuous: Vec<f64>,
}

impl EnergyLedger {
    pub fn pulse_total(&self) -> f64 {
        self.pulses.iter().sum()
    }

    pub fn continuous_total(&self) -> f64 {
        self.continuous.iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.pulse_total() + self.continuous_total()
    }
}

/// One line of a world trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// s
    pub t: f64,
    pub module_id: ModuleId,
    /// mm
    pub x: f64,
    /// mm
    pub y: f64,
    pub event: String,
    #[serde(rename = "force_mN")]
    pub force_mn: f64,
    #[serde(rename = "bank_V")]
    pub bank_v: f64,
    pub reliable: bool,
}

#[derive(Debug, Clone)]
pub struct World {
    pub modules: BTreeMap<ModuleId, Module>,
    pub surface: Surface,
    pub friction_coefficient: f64,
    /// Undirected pairs (low id first) with their holding force (mN).
    pub connections: BTreeMap<(ModuleId, ModuleId), f64>,
    pub gravity: f64,
    /// Holding force given to connections formed by a motion (mN).
    pub default_holding_mn: f64,
    pub drive: MotorDrive,
    pub time: f64,
    pub energy: EnergyLedger,
    pub trace: Vec<TraceRecord>,
}

fn key(a: ModuleId, b: ModuleId) -> (ModuleId, ModuleId) {
    (a.min(b), a.max(b))
}

impl World {
    pub fn new(surface: Surface, drive: MotorDrive) -> Self {
        Self {
            modules: BTreeMap::new(),
            surface,
            friction_coefficient: surface.friction_coefficient(),
            connections: BTreeMap::new(),
            gravity: GRAVITY,
            default_holding_mn: HOLDING_ANCHOR_MN,
            drive,
            time: 0.0,
            energy: EnergyLedger::default(),
            trace: Vec::new(),
        }
    }

    pub fn module(&self, id: ModuleId) -> Result<&Module> {
        self.modules.get(&id).ok_or(WorldError::UnknownModule(id))
    }

    /// Adds a module, refusing overlaps, and aligns the SEP patterns of it
    /// and its neighbours to their relative offsets.
    pub fn add_module(&mut self, module: Module) -> Result<()> {
        if self.modules.contains_key(&module.id) {
            return Err(WorldError::DuplicateModule(module.id));
        }
        if module.pose.quarter_turns > 3 {
            return Err(WorldError::Scenario(format!(
                "quarter_turns must be 0..=3, got {}",
                module.pose.quarter_turns
            )));
        }
        if let Some(o) = self.modules.values().find(|o| o.overlaps(&module)) {
            return Err(WorldError::Collision(module.id, o.id));
        }
        let id = module.id;
        self.modules.insert(id, module);
        let ids: Vec<ModuleId> = self.modules.keys().copied().collect();
        for m in ids {
            self.align_faces(m);
        }
        Ok(())
    }

    /// Sets each face pattern whose motor phase to a neighbour is a whole
    /// number of steps and which is still undetermined.
    fn align_faces(&mut self, id: ModuleId) {
        let me = self.modules[&id].clone();
        let mut faces = me.face_polarities;
        for other in self.modules.values() {
            if other.id == id {
                continue;
            }
            if let Some((axis, _)) = me.contact(other) {
                let motion_axis = 1 - axis;
                if let Some((local, phase)) = self.motor_phase(&me, other, motion_axis) {
                    if faces[local] == [0, 0, 0] {
                        if let Some(p) = pattern_for_phase(phase) {
                            faces[local] = p;
                        }
                    }
                }
            }
        }
        self.modules.get_mut(&id).unwrap().face_polarities = faces;
    }

    /// Local face axis and motor slider phase (µm) of `me` sliding along
    /// `other` on world axis `motion_axis`.
    fn motor_phase(&self, me: &Module, other: &Module, motion_axis: usize) -> Option<(usize, i64)> {
        let (local, sign) = me.pose.to_local(motion_axis, 1);
        let rel = if motion_axis == 0 {
            other.pose.x_um - me.pose.x_um
        } else {
            other.pose.y_um - me.pose.y_um
        };
        let phase = (sign * rel).rem_euclid(MODULE_SIDE_UM);
        if phase % STEP_UM != 0 {
            return None;
        }
        Some((local, phase))
    }

    /// Connects two face-adjacent modules with `holding_mn`.
    pub fn connect(&mut self, a: ModuleId, b: ModuleId, holding_mn: f64) -> Result<()> {
        let (ma, mb) = (self.module(a)?, self.module(b)?);
        if ma.contact(mb).is_none() {
            return Err(WorldError::NotAdjacent(a, b));
        }
        if !(holding_mn >= 0.0) {
            return Err(WorldError::InvalidMotion(format!(
                "holding force must be non-negative, got {holding_mn}"
            )));
        }
        self.connections.insert(key(a, b), holding_mn);
        Ok(())
    }

    pub fn holding(&self, a: ModuleId, b: ModuleId) -> Option<f64> {
        self.connections.get(&key(a, b)).copied()
    }

    /// Drops connections whose modules no longer share a face and connects
    /// newly adjacent pairs involving any of `moved`.
    fn refresh_connections(&mut self, moved: &[ModuleId]) {
        let mods = &self.modules;
        self.connections
            .retain(|&(a, b), _| mods[&a].contact(&mods[&b]).is_some());
        for &m in moved {
            for other in self.modules.values() {
                if other.id != m && self.modules[&m].contact(other).is_some() {
                    self.connections
                        .entry(key(m, other.id))
                        .or_insert(self.default_holding_mn);
                }
            }
        }
    }

    /// Lets time pass with every module stationary. No energy is drawn and
    /// banks top up from the supply.
    pub fn hold(&mut self, duration: f64) -> Result<()> {
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(WorldError::InvalidMotion(format!(
                "hold duration must be non-negative, got {duration}"
            )));
        }
        for m in self.modules.values_mut() {
            m.bank = crate::power::recharge(&m.bank, duration);
        }
        self.time += duration;
        let ids: Vec<ModuleId> = self.modules.keys().copied().collect();
        for id in ids {
            let m = &self.modules[&id];
            let force = self
                .connections
                .iter()
                .filter(|((a, b), _)| *a == id || *b == id)
                .map(|(_, f)| *f)
                .fold(0.0, f64::max);
            self.trace.push(TraceRecord {
                t: self.time,
                module_id: id,
                x: m.pose.x() * 1e3,
                y: m.pose.y() * 1e3,
                event: "hold".into(),
                force_mn: force,
                bank_v: m.bank.voltage,
                reliable: true,
            });
        }
        Ok(())
    }

    /// Connected components over connections stronger than `threshold_mn`.
    /// Isolated modules form their own component.
    pub fn connectivity(&self, threshold_mn: f64) -> Vec<Vec<ModuleId>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in self.modules.keys() {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = vec![start];
            let mut i = 0;
            while i < comp.len() {
                let cur = comp[i];
                for (&(a, b), &f) in &self.connections {
                    if f <= threshold_mn {
                        continue;
                    }
                    let n = if a == cur {
                        b
                    } else if b == cur {
                        a
                    } else {
                        continue;
                    };
                    if seen.insert(n) {
                        comp.push(n);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_collision_free(&self) -> bool {
        let v: Vec<&Module> = self.modules.values().collect();
        v.iter()
            .enumerate()
            .all(|(i, a)| v[i + 1..].iter().all(|b| !a.overlaps(b)))
    }

    pub fn friction_force(&self, mass: f64) -> f64 {
        self.friction_coefficient * mass * self.gravity
    }
}

/// Polarity pattern whose equilibrium is `phase` µm.
pub(crate) fn pattern_for_phase(phase: i64) -> Option<[i8; 3]> {
    let mut out = None;
    for bits in 0..8u8 {
        let p = [0, 1, 2].map(|i| if bits >> i & 1 == 1 { 1 } else { -1 });
        if equilibrium_um(p) == Some(phase) {
            out = Some(p);
        }
    }
    out
}
