//! TOML scenario files and CSV traces.
//!
//! ```toml
//! surface = "wood"          # glass | paper | wood | cement
//! mode = "stable"           # stable | enhanced | fastest
//! friction = 0.35           # optional, overrides the surface default
//!
//! [[modules]]
//! id = 1
//! x_mm = 0.0
//! y_mm = 15.0
//! quarter_turns = 0         # optional
//!
//! [[connections]]
//! a = 1
//! b = 2
//! holding_mn = 75.0         # optional
//!
//! [[actions]]
//! kind = "move"             # move | push | pull | carry | hold
//! actor = 1
//! payload = []              # push / pull / carry
//! heading = "+x"            # +x | -x | +y | -y
//! distance_mm = 15.0
//! mode = "fastest"          # optional per-action override
//! duration_s = 0.5          # hold only
//! ```

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{
    CompositeKind, CompositeMotion, Heading, Module, ModuleId, Pose, Result, TraceRecord, World,
    WorldError,
};
use crate::actuator::{DriveMode, ModeName, MotorDrive};
use crate::Surface;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub surface: Surface,
    #[serde(default = "default_mode")]
    pub mode: ModeName,
    #[serde(default)]
    pub friction: Option<f64>,
    #[serde(default)]
    pub modules: Vec<ScenarioModule>,
    #[serde(default)]
    pub connections: Vec<ScenarioConnection>,
    #[serde(default)]
    pub actions: Vec<Action>,
}

fn default_mode() -> ModeName {
    ModeName::Stable
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioModule {
    pub id: ModuleId,
    pub x_mm: f64,
    pub y_mm: f64,
    #[serde(default)]
    pub quarter_turns: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConnection {
    pub a: ModuleId,
    pub b: ModuleId,
    #[serde(default)]
    pub holding_mn: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Move,
    Push,
    Pull,
    Carry,
    Hold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Action {
    pub kind: ActionKind,
    #[serde(default)]
    pub actor: Option<ModuleId>,
    #[serde(default)]
    pub payload: Vec<ModuleId>,
    #[serde(default)]
    pub heading: Option<Heading>,
    #[serde(default)]
    pub distance_mm: f64,
    #[serde(default)]
    pub mode: Option<ModeName>,
    #[serde(default)]
    pub duration_s: f64,
}

fn to_um(mm: f64, what: &str) -> Result<i64> {
    let um = mm * 1e3;
    let r = um.round();
    if !um.is_finite() || (um - r).abs() > 1e-6 {
        return Err(WorldError::Scenario(format!(
            "{what} = {mm} mm is not a whole number of micrometres"
        )));
    }
    Ok(r as i64)
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| WorldError::Scenario(e.to_string()))
    }

    pub fn build_world(&self, drive: MotorDrive) -> Result<World> {
        let mut w = World::new(self.surface, drive);
        if let Some(mu) = self.friction {
            if !(mu > 0.0) || !mu.is_finite() {
                return Err(WorldError::Scenario(format!(
                    "friction must be positive, got {mu}"
                )));
            }
            w.friction_coefficient = mu;
        }
        for m in &self.modules {
            let mut pose = Pose::new(to_um(m.x_mm, "x_mm")?, to_um(m.y_mm, "y_mm")?);
            pose.quarter_turns = m.quarter_turns;
            w.add_module(Module::new(m.id, pose))?;
        }
        for c in &self.connections {
            w.connect(c.a, c.b, c.holding_mn.unwrap_or(w.default_holding_mn))?;
        }
        Ok(w)
    }

    /// Runs every action in order. On error the world keeps everything done
    /// before the failing action.
    pub fn run(&self, world: &mut World) -> Result<()> {
        for (i, a) in self.actions.iter().enumerate() {
            let mode = DriveMode::from_name(a.mode.unwrap_or(self.mode));
            let kind = match a.kind {
                ActionKind::Hold => {
                    world.hold(a.duration_s)?;
                    continue;
                }
                ActionKind::Move => CompositeKind::Move,
                ActionKind::Push => CompositeKind::Push,
                ActionKind::Pull => CompositeKind::Pull,
                ActionKind::Carry => CompositeKind::Carry,
            };
            let missing = |f: &str| WorldError::Scenario(format!("action {} needs '{f}'", i + 1));
            let motion = CompositeMotion {
                kind,
                actor: a.actor.ok_or_else(|| missing("actor"))?,
                payload: a.payload.clone(),
                heading: a.heading.ok_or_else(|| missing("heading"))?,
                distance_um: to_um(a.distance_mm, "distance_mm")?,
            };
            world.composite(&motion, &mode)?;
        }
        Ok(())
    }
}

/// Writes trace records as CSV with a header row.
pub fn write_trace_csv<W: Write>(out: W, records: &[TraceRecord]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record([
            "t", "module_id", "x", "y", "event", "force_mN", "bank_V", "reliable",
        ])?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()
}
