use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::commutation::{equilibrium_um, Direction, StepCommand};
use super::force::{peak_drive_force, LinearMotorState};
use super::mode::{step_timing, DriveMode, StepTiming};
use super::{ActuatorError, Result};
use crate::constants::{MODULE_SIDE_UM, STEP_UM};
use crate::magnetics::{
    apply_bias, apply_pulse, apply_pulse_traced, magnet_moment, Coil, MagnetKind, MaterialParams,
    Polarity, PulseWaveform, RodState, SolverConfig,
};
use crate::power::{CapacitorBank, PowerError, DEFAULT_MIN_GATE_VOLTAGE};
use crate::Surface;

/// Alternating saturating pulses used to reach the canonical remanent state.
/// Even, so the last one is negative.
const REFERENCE_PULSES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepContext {
    pub surface: Surface,
    /// Sliding friction the slider must overcome (N).
    pub friction_force: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub sep: u8,
    pub polarity: i8,
    /// s
    pub duration: f64,
    /// s
    pub wait: f64,
    pub reliable: bool,
    /// Pulse plus continuous-current energy (J).
    pub energy: f64,
    pub pulse_energy: f64,
    pub hold_energy: f64,
    /// Peak force along the step direction (N).
    pub peak_force: f64,
    /// Segment-averaged peak coil field (A/m).
    pub mean_peak_field: f64,
    /// Bank voltage when the pulse fired (V).
    pub bank_voltage: f64,
    pub peak_current: f64,
    /// Signed moment of the toggled SEP after the pulse (A·m²).
    pub sep_moment: f64,
    pub slider_um: i64,
}

#[derive(Debug, Clone)]
struct PulseOutcome {
    rod: RodState,
    moment: f64,
    mean_peak_field: f64,
}

/// Drives the SEPs of one motor: pulse magnetization, boost, timing and force check.
#[derive(Debug, Clone)]
pub struct MotorDrive {
    pub coil: Coil,
    pub solver: SolverConfig,
    pub timing: StepTiming,
    /// Segment-averaged peak field, in units of Hc, that counts as a reliable switch.
    pub reliability_factor: f64,
    pub min_gate_voltage: f64,
    reference: RodState,
    cache: Arc<Mutex<HashMap<(i8, u64), PulseOutcome>>>,
}

impl MotorDrive {
    /// `rod` sets material and geometry; the canonical state is reached with
    /// pulses of `reference_current`.
    pub fn new(
        rod: &RodState,
        coil: Coil,
        solver: SolverConfig,
        timing: StepTiming,
        reference_current: f64,
    ) -> Result<Self> {
        let mut state = rod.demagnetized();
        let mut pol = Polarity::Positive;
        for _ in 0..REFERENCE_PULSES {
            let wf = PulseWaveform::standard(reference_current, pol);
            state = apply_pulse(&state, &coil, &wf, &solver)?;
            pol = pol.flipped();
        }
        Ok(Self {
            coil,
            solver,
            timing,
            reliability_factor: 3.0,
            min_gate_voltage: DEFAULT_MIN_GATE_VOLTAGE,
            reference: state,
            cache: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    /// Datasheet Alnico5 module SEP fired from a 16 V bank.
    pub fn module_default() -> Result<Self> {
        let coil = Coil::module_sep();
        let current = CapacitorBank::module_default().supply_voltage / coil.resistance;
        Self::new(
            &RodState::module_sep(MaterialParams::datasheet()),
            coil,
            SolverConfig::default(),
            StepTiming::default(),
            current,
        )
    }

    pub fn material(&self) -> &MaterialParams {
        &self.reference.material
    }

    /// Canonical remanent rod of `polarity`, the state left by the last pulse.
    pub fn reference(&self, polarity: i8) -> RodState {
        if polarity >= 0 {
            self.reference.negated()
        } else {
            self.reference.clone()
        }
    }

    /// Signed remanent moment of a canonical SEP (A·m²).
    pub fn remanent_moment(&self) -> f64 {
        magnet_moment(&MagnetKind::SepRod(&self.reference(1)))
    }

    /// Motor at `direction`'s home pattern with canonical SEP moments.
    pub fn home_state(&self, direction: Direction) -> Result<LinearMotorState> {
        LinearMotorState::home(direction, self.remanent_moment())
    }

    fn pulse(&self, polarity: i8, peak_current: f64) -> Result<PulseOutcome> {
        let key = (polarity, peak_current.to_bits());
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let wf = PulseWaveform::standard(peak_current, Polarity::from_sign(polarity as f64));
        let trace = apply_pulse_traced(&self.reference(-polarity), &self.coil, &wf, &self.solver)?;
        let mean_peak_field =
            trace.peak_field.iter().sum::<f64>() / trace.peak_field.len() as f64;
        let out = PulseOutcome {
            moment: magnet_moment(&MagnetKind::SepRod(&trace.rod)),
            rod: trace.rod,
            mean_peak_field,
        };
        self.cache.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }

    /// Moment of a SEP of `polarity` while `current` flows in its coil:
    /// rod magnetization under bias plus the coil's own moment.
    pub fn boosted_moment(&self, rod: &RodState, polarity: i8, current: f64) -> Result<f64> {
        let i = polarity as f64 * current;
        let biased = apply_bias(rod, &self.coil, i, &self.solver)?;
        let r = self.coil.inner_radius;
        Ok(magnet_moment(&MagnetKind::SepRod(&biased)) + self.coil.turns as f64 * i * PI * r * r)
    }

    /// Toggles the SEP that moves the slider one step in `direction`.
    pub fn execute_step(
        &self,
        state: &LinearMotorState,
        direction: Direction,
        mode: &DriveMode,
        bank: &CapacitorBank,
        ctx: &StepContext,
    ) -> Result<(LinearMotorState, CapacitorBank, StepResult)> {
        let cmd = state.plan(direction, 1)?.steps[0];
        self.execute_command(state, cmd, mode, bank, ctx)
    }

    pub fn execute_command(
        &self,
        state: &LinearMotorState,
        cmd: StepCommand,
        mode: &DriveMode,
        bank: &CapacitorBank,
        ctx: &StepContext,
    ) -> Result<(LinearMotorState, CapacitorBank, StepResult)> {
        let pattern = state.sep_polarities;
        if !state.at_equilibrium() {
            return Err(ActuatorError::NotAtEquilibrium {
                slider_um: state.slider_um,
                pattern,
            });
        }
        let idx = cmd.sep as usize;
        if !(1..=3).contains(&idx) || !(cmd.polarity == 1 || cmd.polarity == -1) {
            return Err(ActuatorError::InvalidToggle {
                sep: cmd.sep,
                from: pattern,
            });
        }
        let mut next = pattern;
        next[idx - 1] = cmd.polarity;
        let here = state.phase_um();
        let sign = match equilibrium_um(next).map(|x| (x - here).rem_euclid(MODULE_SIDE_UM)) {
            Some(STEP_UM) => 1,
            Some(d) if d == MODULE_SIDE_UM - STEP_UM => -1,
            _ => {
                return Err(ActuatorError::InvalidToggle {
                    sep: cmd.sep,
                    from: pattern,
                })
            }
        };
        let direction = if sign > 0 {
            Direction::Forward
        } else {
            Direction::Reverse
        };

        let settle = self.timing.effective_settle(mode, ctx.surface);
        let t = step_timing(mode, bank, self.coil.resistance, settle)?;
        if t.voltage_at_pulse < self.min_gate_voltage {
            return Err(PowerError::InsufficientVoltage {
                voltage: t.voltage_at_pulse,
                minimum: self.min_gate_voltage,
            }
            .into());
        }
        let pulse = self.pulse(cmd.polarity, t.peak_current)?;
        let achieved = if pulse.rod.mean_m().abs() >= self.solver.remanence_tolerance * self.material().ms {
            pulse.rod.mean_m().signum() as i8
        } else {
            0
        };
        if achieved != cmd.polarity {
            return Err(ActuatorError::IncompleteSwitch {
                sep: cmd.sep,
                wanted: cmd.polarity,
                achieved,
            });
        }

        let mut after = state.clone();
        after.sep_polarities = next;
        after.sep_moments[idx - 1] = pulse.moment;
        let mut driving = after.clone();
        if mode.continuous_current > 0.0 {
            driving.sep_moments[idx - 1] =
                self.boosted_moment(&pulse.rod, cmd.polarity, mode.continuous_current)?;
        }
        let peak = peak_drive_force(&driving, direction)?;
        if peak <= ctx.friction_force {
            return Err(ActuatorError::Stall {
                peak_mn: peak * 1e3,
                demand_mn: ctx.friction_force * 1e3,
            });
        }
        after.slider_um += sign * STEP_UM;
        let reliable =
            pulse.mean_peak_field >= self.reliability_factor * self.material().hc;
        let result = StepResult {
            sep: cmd.sep,
            polarity: cmd.polarity,
            duration: t.duration,
            wait: t.wait,
            reliable,
            energy: t.pulse_energy + t.hold_energy,
            pulse_energy: t.pulse_energy,
            hold_energy: t.hold_energy,
            peak_force: peak,
            mean_peak_field: pulse.mean_peak_field,
            bank_voltage: t.voltage_at_pulse,
            peak_current: t.peak_current,
            sep_moment: pulse.moment,
            slider_um: after.slider_um,
        };
        Ok((after, t.bank_after, result))
    }
}

/// Steps in one module-length move, the span a speed is averaged over.
pub const SPEED_STEPS: usize = 6;

/// Mean speed (mm/s) of a six-step move starting from `bank`. Steps are
/// quasi-static so only the timing model matters.
pub fn predict_speed(
    mode: &DriveMode,
    surface: Surface,
    timing: &StepTiming,
    coil_resistance: f64,
    bank: &CapacitorBank,
) -> Result<f64> {
    let settle = timing.effective_settle(mode, surface);
    let mut b = *bank;
    let mut total = 0.0;
    for _ in 0..SPEED_STEPS {
        let t = step_timing(mode, &b, coil_resistance, settle)?;
        total += t.duration;
        b = t.bank_after;
    }
    Ok(mode.step_distance * 1e3 * SPEED_STEPS as f64 / total)
}
