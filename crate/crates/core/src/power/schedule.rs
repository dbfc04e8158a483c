use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{HbId, MultiplexAssignment, PowerError, Result, Switch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    On,
    Off,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::On => "on",
            Action::Off => "off",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateEvent {
    /// Seconds from the schedule origin.
    pub time: f64,
    pub hb: HbId,
    pub switch: Switch,
    pub action: Action,
}

impl GateEvent {
    pub fn new(time: f64, hb: HbId, switch: Switch, action: Action) -> Self {
        Self {
            time,
            hb,
            switch,
            action,
        }
    }
}

/// Timed switch events ordered by time. Events sharing a timestamp keep the
/// order in which they were given.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GateSchedule {
    events: Vec<GateEvent>,
}

impl GateSchedule {
    pub fn new(mut events: Vec<GateEvent>) -> Result<Self> {
        for e in &events {
            if !e.time.is_finite() || e.time < 0.0 {
                return Err(PowerError::InvalidParameter(format!(
                    "event time must be finite and non-negative, got {}",
                    e.time
                )));
            }
            if !(1..=4).contains(&e.hb) {
                return Err(PowerError::InvalidParameter(format!(
                    "half-bridge id {} out of range 1..=4",
                    e.hb
                )));
            }
        }
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        Ok(Self { events })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[GateEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Time of the last event (0 for an empty schedule).
    pub fn horizon(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.time)
    }

    pub fn extend(&mut self, more: &[GateEvent]) -> Result<()> {
        let mut all = std::mem::take(&mut self.events);
        all.extend_from_slice(more);
        *self = Self::new(all)?;
        Ok(())
    }

    /// Parses lines of the form `t_seconds HB<id> <high|low> <on|off>`.
    /// Blank lines and text after `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut events = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| PowerError::Parse {
                line: line_no,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(err(format!("expected 4 fields, found {}", fields.len())));
            }
            let time: f64 = fields[0]
                .parse()
                .map_err(|_| err(format!("bad time '{}'", fields[0])))?;
            if !time.is_finite() || time < 0.0 {
                return Err(err(format!("time must be finite and non-negative, got {time}")));
            }
            let hb: HbId = fields[1]
                .strip_prefix("HB")
                .and_then(|s| s.parse().ok())
                .filter(|h| (1..=4).contains(h))
                .ok_or_else(|| err(format!("bad half-bridge '{}'", fields[1])))?;
            let switch: Switch = fields[2].parse().map_err(err)?;
            let action = match fields[3] {
                "on" => Action::On,
                "off" => Action::Off,
                other => return Err(err(format!("expected 'on' or 'off', got '{other}'"))),
            };
            events.push(GateEvent::new(time, hb, switch, action));
        }
        Self::new(events)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let _ = writeln!(out, "{} HB{} {} {}", e.time, e.hb, e.switch, e.action);
        }
        out
    }
}

/// Turn-on and turn-off delays of one switch (s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchOffset {
    pub hb: HbId,
    pub switch: Switch,
    pub on_delay: f64,
    pub off_delay: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DeadTimeConfig {
    /// Minimum gap between the two switches of a half-bridge conducting (s).
    pub dead_time: f64,
    pub offsets: Vec<SwitchOffset>,
}

impl DeadTimeConfig {
    pub fn new(dead_time: f64) -> Result<Self> {
        if !(dead_time >= 0.0) || !dead_time.is_finite() {
            return Err(PowerError::InvalidParameter(format!(
                "dead time must be non-negative, got {dead_time}"
            )));
        }
        Ok(Self {
            dead_time,
            offsets: Vec::new(),
        })
    }

    fn delays(&self, hb: HbId, sw: Switch) -> (f64, f64) {
        self.offsets
            .iter()
            .find(|o| o.hb == hb && o.switch == sw)
            .map_or((0.0, 0.0), |o| (o.on_delay, o.off_delay))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    /// Both switches of `hb` conduct, or conduct closer than the dead time.
    ShootThrough {
        hb: HbId,
        high: (f64, f64),
        low: (f64, f64),
        gap: f64,
    },
    /// Two coils sharing `hb` are driven at once and need it in opposite states.
    MultiplexConflict {
        hb: HbId,
        coils: (u8, u8),
        start: f64,
        end: f64,
    },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::ShootThrough { .. } => "ShootThrough",
            Violation::MultiplexConflict { .. } => "MultiplexConflict",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ShootThrough { hb, high, low, gap } => write!(
                f,
                "ShootThrough hb=HB{hb} high=[{},{}) low=[{},{}) gap={gap}",
                high.0, high.1, low.0, low.1
            ),
            Violation::MultiplexConflict {
                hb,
                coils,
                start,
                end,
            } => write!(
                f,
                "MultiplexConflict hb=HB{hb} coils={},{} window=[{start},{end})",
                coils.0, coils.1
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: &str) -> bool {
        self.violations.iter().any(|v| v.kind() == kind)
    }
}

/// Conduction intervals `[start, end)` per switch after applying the switch
/// delays. A switch left on conducts until +inf; zero-length intervals are dropped.
pub fn conduction_intervals(
    sched: &GateSchedule,
    dt: &DeadTimeConfig,
) -> BTreeMap<(HbId, Switch), Vec<(f64, f64)>> {
    let mut open: BTreeMap<(HbId, Switch), f64> = BTreeMap::new();
    let mut out: BTreeMap<(HbId, Switch), Vec<(f64, f64)>> = BTreeMap::new();
    for e in sched.events() {
        let key = (e.hb, e.switch);
        match e.action {
            Action::On => {
                open.entry(key).or_insert(e.time);
            }
            Action::Off => {
                if let Some(t0) = open.remove(&key) {
                    out.entry(key).or_default().push((t0, e.time));
                }
            }
        }
    }
    for (key, t0) in open {
        out.entry(key).or_default().push((t0, f64::INFINITY));
    }
    for (&(hb, sw), ivs) in out.iter_mut() {
        let (on_d, off_d) = dt.delays(hb, sw);
        for iv in ivs.iter_mut() {
            *iv = (iv.0 + on_d, iv.1 + off_d);
        }
        ivs.retain(|iv| iv.1 > iv.0);
    }
    out.retain(|_, v| !v.is_empty());
    out
}

fn is_on(ivs: Option<&Vec<(f64, f64)>>, t: f64) -> bool {
    ivs.map_or(false, |v| v.iter().any(|&(a, b)| a <= t && t < b))
}

/// Checks a schedule for shoot-through and multiplex conflicts.
pub fn validate_schedule(
    sched: &GateSchedule,
    mux: &MultiplexAssignment,
    dt: &DeadTimeConfig,
) -> ValidationReport {
    let ivs = conduction_intervals(sched, dt);
    let mut violations = Vec::new();

    for hb in 1..=4u8 {
        let (Some(highs), Some(lows)) = (ivs.get(&(hb, Switch::High)), ivs.get(&(hb, Switch::Low)))
        else {
            continue;
        };
        for &h in highs {
            for &l in lows {
                let gap = f64::max(l.0 - h.1, h.0 - l.1);
                if gap < dt.dead_time {
                    violations.push(Violation::ShootThrough {
                        hb,
                        high: h,
                        low: l,
                        gap,
                    });
                }
            }
        }
    }

    let mut times: Vec<f64> = ivs
        .values()
        .flat_map(|v| v.iter().flat_map(|&(a, b)| [a, b]))
        .filter(|t| t.is_finite())
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let probes: Vec<(f64, f64)> = times
        .windows(2)
        .map(|w| (w[0], w[1]))
        .chain(times.last().map(|&t| (t, f64::INFINITY)))
        .collect();

    for (s, cx, px, cy, py) in mux.shared() {
        let on = |hb: HbId, sw: Switch, t: f64| is_on(ivs.get(&(hb, sw)), t);
        let mut window: Option<(f64, f64)> = None;
        for &(a, b) in &probes {
            let t = a;
            // A coil needs `s` in state `sw` when `s.sw` and its partner's
            // complementary switch both conduct.
            let needs = |partner: HbId, sw: Switch| on(s, sw, t) && on(partner, sw.other(), t);
            let conflict = (needs(px, Switch::High) && needs(py, Switch::Low))
                || (needs(px, Switch::Low) && needs(py, Switch::High));
            match (conflict, window.as_mut()) {
                (true, Some(w)) if w.1 == a => w.1 = b,
                (true, _) => {
                    if let Some((start, end)) = window.take() {
                        violations.push(Violation::MultiplexConflict {
                            hb: s,
                            coils: (cx, cy),
                            start,
                            end,
                        });
                    }
                    window = Some((a, b));
                }
                (false, _) => {
                    if let Some((start, end)) = window.take() {
                        violations.push(Violation::MultiplexConflict {
                            hb: s,
                            coils: (cx, cy),
                            start,
                            end,
                        });
                    }
                }
            }
        }
        if let Some((start, end)) = window {
            violations.push(Violation::MultiplexConflict {
                hb: s,
                coils: (cx, cy),
                start,
                end,
            });
        }
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power::build_multiplex;

    fn ev(t: f64, hb: HbId, sw: Switch, a: Action) -> GateEvent {
        GateEvent::new(t, hb, sw, a)
    }

    #[test]
    fn parse_round_trip() {
        let text = "# pulse\n0.04 HB1 high on\n0.04 HB2 low on\n0.04042 HB1 high off\n0.04042 HB2 low off\n";
        let s = GateSchedule::parse(text).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(GateSchedule::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = GateSchedule::parse("0 HB1 high on\n0.1 HB7 low on\n").unwrap_err();
        assert_eq!(
            err,
            PowerError::Parse {
                line: 2,
                message: "bad half-bridge 'HB7'".into()
            }
        );
        assert!(GateSchedule::parse("x HB1 high on").is_err());
        assert!(GateSchedule::parse("0 HB1 middle on").is_err());
        assert!(GateSchedule::parse("0 HB1 high maybe").is_err());
        assert!(GateSchedule::parse("-1 HB1 high on").is_err());
    }

    #[test]
    fn equal_times_keep_file_order() {
        let s = GateSchedule::new(vec![
            ev(1.0, 1, Switch::High, Action::Off),
            ev(0.0, 1, Switch::High, Action::On),
            ev(1.0, 1, Switch::High, Action::On),
        ])
        .unwrap();
        assert_eq!(s.events()[1].action, Action::Off);
        assert_eq!(s.events()[2].action, Action::On);
    }

    #[test]
    fn empty_schedule_is_ok() {
        let r = validate_schedule(
            &GateSchedule::empty(),
            &build_multiplex(),
            &DeadTimeConfig::new(0.04).unwrap(),
        );
        assert!(r.is_ok());
    }

    #[test]
    fn low_on_within_half_dead_time_is_shoot_through() {
        let dt = 0.04;
        let s = GateSchedule::new(vec![
            ev(0.0, 1, Switch::High, Action::On),
            ev(0.001, 1, Switch::High, Action::Off),
            ev(0.001 + dt / 2.0, 1, Switch::Low, Action::On),
        ])
        .unwrap();
        let r = validate_schedule(&s, &build_multiplex(), &DeadTimeConfig::new(dt).unwrap());
        assert!(r.has("ShootThrough"));
        let exact = GateSchedule::new(vec![
            ev(0.0, 1, Switch::High, Action::On),
            ev(0.001, 1, Switch::High, Action::Off),
            ev(0.001 + dt, 1, Switch::Low, Action::On),
        ])
        .unwrap();
        assert!(validate_schedule(&exact, &build_multiplex(), &DeadTimeConfig::new(dt).unwrap()).is_ok());
    }

    #[test]
    fn overlapping_positive_drives_of_coils_one_and_two_conflict() {
        // coil1 + : HB1 high, HB2 low. coil2 + : HB2 high, HB3 low.
        let s = GateSchedule::new(vec![
            ev(0.0, 1, Switch::High, Action::On),
            ev(0.0, 2, Switch::Low, Action::On),
            ev(0.0001, 2, Switch::High, Action::On),
            ev(0.0001, 3, Switch::Low, Action::On),
            ev(0.0004, 1, Switch::High, Action::Off),
            ev(0.0004, 2, Switch::Low, Action::Off),
            ev(0.0005, 2, Switch::High, Action::Off),
            ev(0.0005, 3, Switch::Low, Action::Off),
        ])
        .unwrap();
        let r = validate_schedule(&s, &build_multiplex(), &DeadTimeConfig::new(1e-5).unwrap());
        assert!(r.has("MultiplexConflict"));
        assert!(r.has("ShootThrough"));
        let conflict = r
            .violations
            .iter()
            .find(|v| v.kind() == "MultiplexConflict")
            .unwrap();
        assert_eq!(
            *conflict,
            Violation::MultiplexConflict {
                hb: 2,
                coils: (1, 2),
                start: 0.0001,
                end: 0.0004
            }
        );
    }

    #[test]
    fn switch_delays_shift_conduction() {
        let mut dt = DeadTimeConfig::new(0.0).unwrap();
        dt.offsets.push(SwitchOffset {
            hb: 1,
            switch: Switch::High,
            on_delay: 0.0,
            off_delay: 0.002,
        });
        let s = GateSchedule::new(vec![
            ev(0.0, 1, Switch::High, Action::On),
            ev(0.001, 1, Switch::High, Action::Off),
            ev(0.002, 1, Switch::Low, Action::On),
            ev(0.003, 1, Switch::Low, Action::Off),
        ])
        .unwrap();
        let r = validate_schedule(&s, &build_multiplex(), &dt);
        assert!(r.has("ShootThrough"));
    }
}
