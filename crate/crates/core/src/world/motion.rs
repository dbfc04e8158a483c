use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Module, ModuleId, Result, TraceRecord, World, WorldError};
use crate::actuator::{Direction, DriveMode, LinearMotorState, StepContext};
use crate::constants::STEP_UM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Heading {
    #[serde(rename = "+x")]
    PosX,
    #[serde(rename = "-x")]
    NegX,
    #[serde(rename = "+y")]
    PosY,
    #[serde(rename = "-y")]
    NegY,
}

impl Heading {
    pub fn axis(self) -> usize {
        match self {
            Heading::PosX | Heading::NegX => 0,
            Heading::PosY | Heading::NegY => 1,
        }
    }

    pub fn sign(self) -> i64 {
        match self {
            Heading::PosX | Heading::PosY => 1,
            Heading::NegX | Heading::NegY => -1,
        }
    }

    pub fn reversed(self) -> Heading {
        match self {
            Heading::PosX => Heading::NegX,
            Heading::NegX => Heading::PosX,
            Heading::PosY => Heading::NegY,
            Heading::NegY => Heading::PosY,
        }
    }
}

impl fmt::Display for Heading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heading::PosX => "+x",
            Heading::NegX => "-x",
            Heading::PosY => "+y",
            Heading::NegY => "-y",
        })
    }
}

impl FromStr for Heading {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "+x" | "x" => Ok(Heading::PosX),
            "-x" => Ok(Heading::NegX),
            "+y" | "y" => Ok(Heading::PosY),
            "-y" => Ok(Heading::NegY),
            other => Err(format!("unknown heading '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompositeKind {
    Move,
    Push,
    Pull,
    Carry,
}

impl fmt::Display for CompositeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompositeKind::Move => "move",
            CompositeKind::Push => "push",
            CompositeKind::Pull => "pull",
            CompositeKind::Carry => "carry",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeMotion {
    pub kind: CompositeKind,
    pub actor: ModuleId,
    pub payload: Vec<ModuleId>,
    pub heading: Heading,
    pub distance_um: i64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MotionReport {
    pub trace: Vec<TraceRecord>,
    /// Friction of the payload alone (mN).
    pub required_force_mn: f64,
    /// Friction of everything the motor moves (mN).
    pub demand_mn: f64,
    /// Smallest per-step peak drive force (mN).
    pub min_peak_force_mn: f64,
    /// J
    pub energy: f64,
}

impl World {
    /// Slides `id` along a neighbour by `distance_um`, one 2.5 mm step at a time.
    pub fn slide(
        &mut self,
        id: ModuleId,
        heading: Heading,
        distance_um: i64,
        mode: &DriveMode,
    ) -> Result<MotionReport> {
        self.composite(
            &CompositeMotion {
                kind: CompositeKind::Move,
                actor: id,
                payload: Vec::new(),
                heading,
                distance_um,
            },
            mode,
        )
    }

    /// Runs a move or composite motion. The world is left untouched on error.
    pub fn composite(&mut self, motion: &CompositeMotion, mode: &DriveMode) -> Result<MotionReport> {
        let mut next = self.clone();
        let report = next.run_composite(motion, mode)?;
        *self = next;
        Ok(report)
    }

    fn run_composite(&mut self, motion: &CompositeMotion, mode: &DriveMode) -> Result<MotionReport> {
        let d = motion.distance_um;
        if d < 0 || d % STEP_UM != 0 {
            return Err(WorldError::InvalidMotion(format!(
                "distance {d} um is not a non-negative multiple of the {STEP_UM} um step"
            )));
        }
        let actor = self.module(motion.actor)?.clone();
        let payload_mass = self.check_payload(motion)?;
        let group: Vec<ModuleId> = std::iter::once(motion.actor)
            .chain(motion.payload.iter().copied())
            .collect();
        let moved_mass = actor.mass + payload_mass;
        let demand = self.friction_force(moved_mass);
        let mut report = MotionReport {
            required_force_mn: self.friction_force(payload_mass) * 1e3,
            demand_mn: demand * 1e3,
            min_peak_force_mn: f64::INFINITY,
            ..MotionReport::default()
        };
        let axis = motion.heading.axis();
        let sign = motion.heading.sign();
        for _ in 0..d / STEP_UM {
            let actor = self.modules[&motion.actor].clone();
            let stator = self.stator_for(&actor, &group, axis)?;
            let (local, phase) = self
                .motor_phase(&actor, &stator, axis)
                .ok_or(WorldError::NoMotorContact(actor.id))?;
            let mut motor = LinearMotorState::new(
                actor.face_polarities[local],
                self.drive.remanent_moment(),
            )?;
            motor.slider_um = phase;
            // The neighbour's magnets form the slider, so they move opposite to the actor.
            let local_sign = actor.pose.to_local(axis, sign).1;
            let direction = if local_sign < 0 {
                Direction::Forward
            } else {
                Direction::Reverse
            };
            let ctx = StepContext {
                surface: self.surface,
                friction_force: demand,
            };
            let (after, bank, step) =
                self.drive
                    .execute_step(&motor, direction, mode, &actor.bank, &ctx)?;
            if motion.kind == CompositeKind::Carry {
                self.check_carry(motion, payload_mass, moved_mass, step.peak_force)?;
            }
            {
                let a = self.modules.get_mut(&motion.actor).unwrap();
                a.face_polarities[local] = after.sep_polarities;
                a.bank = bank;
            }
            for &m in &group {
                let p = &mut self.modules.get_mut(&m).unwrap().pose;
                if axis == 0 {
                    p.x_um += sign * STEP_UM;
                } else {
                    p.y_um += sign * STEP_UM;
                }
            }
            self.check_collisions(&group)?;
            self.energy.pulses.push(step.pulse_energy);
            if step.hold_energy > 0.0 {
                self.energy.continuous.push(step.hold_energy);
            }
            self.time += step.duration;
            report.energy += step.energy;
            report.min_peak_force_mn = report.min_peak_force_mn.min(step.peak_force * 1e3);
            for &m in &group {
                let p = self.modules[&m].pose;
                report.trace.push(TraceRecord {
                    t: self.time,
                    module_id: m,
                    x: p.x() * 1e3,
                    y: p.y() * 1e3,
                    event: if m == motion.actor {
                        format!("{}:sep{}{}", motion.kind, step.sep, if step.polarity > 0 { '+' } else { '-' })
                    } else {
                        format!("{}:payload", motion.kind)
                    },
                    force_mn: step.peak_force * 1e3,
                    bank_v: step.bank_voltage,
                    reliable: step.reliable,
                });
            }
        }
        if report.trace.is_empty() {
            report.min_peak_force_mn = 0.0;
        }
        self.refresh_connections(&group);
        for &m in &group {
            self.align_faces(m);
        }
        self.trace.extend(report.trace.iter().cloned());
        Ok(report)
    }

    /// Validates the payload layout for the motion kind and returns its mass.
    fn check_payload(&self, motion: &CompositeMotion) -> Result<f64> {
        let actor = self.module(motion.actor)?;
        if motion.kind == CompositeKind::Move {
            if !motion.payload.is_empty() {
                return Err(WorldError::InvalidMotion("a plain move takes no payload".into()));
            }
            return Ok(0.0);
        }
        if motion.payload.is_empty() {
            return Err(WorldError::InvalidMotion(format!(
                "{} needs a payload",
                motion.kind
            )));
        }
        let mut mass = 0.0;
        let mut placed: Vec<&Module> = vec![actor];
        for &p in &motion.payload {
            if p == motion.actor || motion.payload.iter().filter(|&&q| q == p).count() > 1 {
                return Err(WorldError::InvalidMotion(format!("payload {p} listed twice")));
            }
            let m = self.module(p)?;
            if !placed.iter().any(|o| o.contact(m).is_some()) {
                return Err(WorldError::NotAdjacent(motion.actor, p));
            }
            placed.push(m);
            mass += m.mass;
        }
        let first = self.module(motion.payload[0])?;
        let (axis, side) = actor
            .contact(first)
            .ok_or(WorldError::NotAdjacent(motion.actor, first.id))?;
        let heading_axis = motion.heading.axis();
        let sign = motion.heading.sign();
        let ok = match motion.kind {
            CompositeKind::Push => axis == heading_axis && side == sign,
            CompositeKind::Pull => axis == heading_axis && side == -sign,
            CompositeKind::Carry => axis != heading_axis,
            CompositeKind::Move => true,
        };
        if !ok {
            return Err(WorldError::InvalidMotion(format!(
                "payload {} is not placed for a {} towards {}",
                first.id, motion.kind, motion.heading
            )));
        }
        // Pull and carry both rely on the connection to drag the payload.
        if matches!(motion.kind, CompositeKind::Pull | CompositeKind::Carry) {
            let holding = self.holding(motion.actor, first.id).unwrap_or(0.0);
            let need = self.friction_force(mass) * 1e3;
            if holding < need {
                return Err(WorldError::ConnectionTooWeak {
                    holding_mn: holding,
                    demand_mn: need,
                });
            }
        }
        Ok(mass)
    }

    /// Carry keeps the payload attached through the step: the connection must
    /// cover its friction plus the largest acceleration the motor can impart.
    fn check_carry(
        &self,
        motion: &CompositeMotion,
        payload_mass: f64,
        moved_mass: f64,
        peak_force: f64,
    ) -> Result<()> {
        let accel = (peak_force - self.friction_force(moved_mass)).max(0.0) / moved_mass;
        let need = (self.friction_force(payload_mass) + payload_mass * accel) * 1e3;
        let holding = self.holding(motion.actor, motion.payload[0]).unwrap_or(0.0);
        if holding < need {
            return Err(WorldError::ConnectionTooWeak {
                holding_mn: holding,
                demand_mn: need,
            });
        }
        Ok(())
    }

    /// Neighbour outside `group` sharing a face parallel to the motion with
    /// the actor and sitting at a whole-step phase. The largest overlap wins.
    fn stator_for(&self, actor: &Module, group: &[ModuleId], axis: usize) -> Result<Module> {
        self.modules
            .values()
            .filter(|o| !group.contains(&o.id))
            .filter(|o| matches!(actor.contact(o), Some((a, _)) if a != axis))
            .filter(|o| self.motor_phase(actor, o, axis).is_some())
            .min_by_key(|o| {
                let rel = if axis == 0 {
                    o.pose.x_um - actor.pose.x_um
                } else {
                    o.pose.y_um - actor.pose.y_um
                };
                (rel.abs(), o.id)
            })
            .cloned()
            .ok_or(WorldError::NoMotorContact(actor.id))
    }

    fn check_collisions(&self, group: &[ModuleId]) -> Result<()> {
        for &m in group {
            let me = &self.modules[&m];
            if let Some(o) = self
                .modules
                .values()
                .find(|o| o.id != m && !group.contains(&o.id) && o.overlaps(me))
            {
                return Err(WorldError::Collision(m, o.id));
            }
        }
        Ok(())
    }
}
