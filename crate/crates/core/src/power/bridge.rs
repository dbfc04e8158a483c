use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{PowerError, Result};
use crate::magnetics::Polarity;

/// Half-bridge index, 1..=4.
pub type HbId = u8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Switch {
    High,
    Low,
}

impl Switch {
    pub fn other(self) -> Switch {
        match self {
            Switch::High => Switch::Low,
            Switch::Low => Switch::High,
        }
    }
}

impl fmt::Display for Switch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Switch::High => "high",
            Switch::Low => "low",
        })
    }
}

impl FromStr for Switch {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "high" => Ok(Switch::High),
            "low" => Ok(Switch::Low),
            other => Err(format!("expected 'high' or 'low', got '{other}'")),
        }
    }
}

/// Instantaneous switch state of one half-bridge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HalfBridge {
    pub id: HbId,
    pub high_on: bool,
    pub low_on: bool,
}

impl HalfBridge {
    pub fn is_shoot_through(&self) -> bool {
        self.high_on && self.low_on
    }

    pub fn is_on(&self, sw: Switch) -> bool {
        match sw {
            Switch::High => self.high_on,
            Switch::Low => self.low_on,
        }
    }
}

/// Which pair of half-bridges forms each coil's H-bridge. The first bridge of
/// a pair sources current for a positive pulse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplexAssignment {
    coil_to_bridges: BTreeMap<u8, (HbId, HbId)>,
}

impl MultiplexAssignment {
    pub fn new(coil_to_bridges: BTreeMap<u8, (HbId, HbId)>) -> Result<Self> {
        let coils: Vec<u8> = coil_to_bridges.keys().copied().collect();
        if coils != vec![1, 2, 3] {
            return Err(PowerError::InvalidParameter(format!(
                "multiplex must map coils 1, 2 and 3, got {coils:?}"
            )));
        }
        let mut used = BTreeSet::new();
        for (&coil, &(a, b)) in &coil_to_bridges {
            if a == b {
                return Err(PowerError::InvalidParameter(format!(
                    "coil {coil} uses half-bridge {a} twice"
                )));
            }
            for hb in [a, b] {
                if !(1..=4).contains(&hb) {
                    return Err(PowerError::InvalidParameter(format!(
                        "half-bridge id {hb} out of range 1..=4"
                    )));
                }
                used.insert(hb);
            }
        }
        if used.len() != 4 {
            return Err(PowerError::InvalidParameter(format!(
                "three coils must share exactly four half-bridges, got {}",
                used.len()
            )));
        }
        Ok(Self { coil_to_bridges })
    }

    pub fn bridges(&self, coil: u8) -> Result<(HbId, HbId)> {
        self.coil_to_bridges
            .get(&coil)
            .copied()
            .ok_or(PowerError::UnknownCoil(coil))
    }

    pub fn coils(&self) -> impl Iterator<Item = (u8, (HbId, HbId))> + '_ {
        self.coil_to_bridges.iter().map(|(&c, &p)| (c, p))
    }

    pub fn half_bridges(&self) -> BTreeSet<HbId> {
        self.coil_to_bridges
            .values()
            .flat_map(|&(a, b)| [a, b])
            .collect()
    }

    /// (shared half-bridge, coil x, x's other bridge, coil y, y's other bridge).
    pub fn shared(&self) -> Vec<(HbId, u8, HbId, u8, HbId)> {
        let coils: Vec<(u8, (HbId, HbId))> = self.coils().collect();
        let mut out = Vec::new();
        for i in 0..coils.len() {
            for j in i + 1..coils.len() {
                let (cx, (xa, xb)) = coils[i];
                let (cy, (ya, yb)) = coils[j];
                for s in [xa, xb] {
                    if s == ya || s == yb {
                        let px = if s == xa { xb } else { xa };
                        let py = if s == ya { yb } else { ya };
                        out.push((s, cx, px, cy, py));
                    }
                }
            }
        }
        out
    }

    /// Switches that conduct when `coil` is driven with `polarity`.
    pub fn drive_switches(&self, coil: u8, polarity: Polarity) -> Result<[(HbId, Switch); 2]> {
        let (a, b) = self.bridges(coil)?;
        Ok(match polarity {
            Polarity::Positive => [(a, Switch::High), (b, Switch::Low)],
            Polarity::Negative => [(a, Switch::Low), (b, Switch::High)],
        })
    }
}

/// Chain topology: coil1 on (HB1, HB2), coil2 on (HB2, HB3), coil3 on (HB3, HB4).
pub fn build_multiplex() -> MultiplexAssignment {
    let map = BTreeMap::from([(1, (1, 2)), (2, (2, 3)), (3, (3, 4))]);
    MultiplexAssignment::new(map).expect("chain topology is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_shares_middle_bridges() {
        let mux = build_multiplex();
        assert_eq!(mux.bridges(2).unwrap(), (2, 3));
        assert_eq!(mux.half_bridges().len(), 4);
        let shared: Vec<_> = mux.shared().iter().map(|s| (s.0, s.1, s.3)).collect();
        assert_eq!(shared, vec![(2, 1, 2), (3, 2, 3)]);
        for (_, (a, b)) in mux.coils() {
            assert_ne!(a, b);
        }
    }

    #[test]
    fn rejects_bad_maps() {
        let dup = BTreeMap::from([(1, (1, 1)), (2, (2, 3)), (3, (3, 4))]);
        assert!(MultiplexAssignment::new(dup).is_err());
        let five = BTreeMap::from([(1, (1, 2)), (2, (3, 4)), (3, (4, 5))]);
        assert!(MultiplexAssignment::new(five).is_err());
        let three = BTreeMap::from([(1, (1, 2)), (2, (2, 3)), (3, (3, 1))]);
        assert!(MultiplexAssignment::new(three).is_err());
    }
}
