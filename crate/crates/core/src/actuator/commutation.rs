use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ActuatorError, Result};
use crate::constants::{MODULE_SIDE_UM, STEP_UM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn sign(self) -> i64 {
        match self {
            Direction::Forward => 1,
            Direction::Reverse => -1,
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Reverse => "reverse",
        })
    }
}

impl FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "forward" => Ok(Direction::Forward),
            "reverse" => Ok(Direction::Reverse),
            other => Err(format!("unknown direction '{other}'")),
        }
    }
}

/// Toggle one SEP (1-based) to `polarity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCommand {
    pub sep: u8,
    pub polarity: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StepPlan {
    pub steps: Vec<StepCommand>,
}

impl StepPlan {
    pub fn order(&self) -> Vec<u8> {
        self.steps.iter().map(|s| s.sep).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

// SEPs sit at 12.5, 7.5 and 2.5 mm in a 15 mm period and the slider carries two
// like-poled NdFeB magnets 5 mm apart. The slider centers on the positive SEPs.
const EQUILIBRIA: [([i8; 3], i64); 6] = [
    ([1, -1, 1], 0),
    ([-1, -1, 1], 2_500),
    ([-1, 1, 1], 5_000),
    ([-1, 1, -1], 7_500),
    ([1, 1, -1], 10_000),
    ([1, -1, -1], 12_500),
];

/// Attractive equilibrium of a polarity pattern within one period (µm).
pub fn equilibrium_um(pattern: [i8; 3]) -> Option<i64> {
    EQUILIBRIA
        .iter()
        .find(|(p, _)| *p == pattern)
        .map(|&(_, x)| x)
}

/// Pattern each direction's canonical sequence starts from.
pub fn home_polarities(direction: Direction) -> [i8; 3] {
    match direction {
        Direction::Forward => [1, -1, -1],
        Direction::Reverse => [1, 1, -1],
    }
}

fn next_toggle(pattern: [i8; 3], direction: Direction) -> Result<StepCommand> {
    let here = equilibrium_um(pattern).ok_or(ActuatorError::NoEquilibrium(pattern))?;
    let target = (here + direction.sign() * STEP_UM).rem_euclid(MODULE_SIDE_UM);
    for i in 0..3 {
        let mut p = pattern;
        p[i] = -p[i];
        if equilibrium_um(p) == Some(target) {
            return Ok(StepCommand {
                sep: i as u8 + 1,
                polarity: p[i],
            });
        }
    }
    Err(ActuatorError::NoEquilibrium(pattern))
}

/// Plan of `n_steps` toggles moving the slider in `direction` from `pattern`.
pub fn plan_from(pattern: [i8; 3], direction: Direction, n_steps: usize) -> Result<StepPlan> {
    let mut p = pattern;
    let mut steps = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        let cmd = next_toggle(p, direction)?;
        p[cmd.sep as usize - 1] = cmd.polarity;
        steps.push(cmd);
    }
    Ok(StepPlan { steps })
}

/// Canonical sequence: forward toggles 3, 1, 2, … and reverse toggles
/// 1, 3, 2, …, each starting from its own home pattern.
pub fn step_sequence(direction: Direction, n_steps: usize) -> StepPlan {
    plan_from(home_polarities(direction), direction, n_steps).expect("home patterns are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_orders() {
        assert_eq!(step_sequence(Direction::Forward, 6).order(), vec![3, 1, 2, 3, 1, 2]);
        assert_eq!(step_sequence(Direction::Reverse, 6).order(), vec![1, 3, 2, 1, 3, 2]);
        assert!(step_sequence(Direction::Forward, 0).is_empty());
    }

    #[test]
    fn uniform_patterns_have_no_plan() {
        assert!(plan_from([1, 1, 1], Direction::Forward, 1).is_err());
        assert!(plan_from([0, 1, -1], Direction::Forward, 1).is_err());
    }
}
