//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use dili::power::{Action, GateEvent, GateSchedule, MultiplexAssignment, Switch};
use rand::Rng;

/// Switch states after replaying every event with time <= t.
fn state_at(events: &[GateEvent], hb: u8, sw: Switch, t: f64) -> bool {
    let mut on = false;
    for e in events.iter().filter(|e| e.hb == hb && e.switch == sw && e.time <= t) {
        on = e.action == Action::On;
    }
    on
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteVerdict {
    pub shoot_through: bool,
    pub multiplex_conflict: bool,
}

/// Replays a schedule whose event times are whole multiples of `unit` on a
/// quarter-unit grid. With integer-unit times and dead time, two half-open
/// conduction intervals are closer than the dead time exactly when some pair
/// of grid samples is.
pub fn brute_check(
    sched: &GateSchedule,
    mux: &MultiplexAssignment,
    dead_units: i64,
    unit: f64,
    horizon_units: i64,
) -> BruteVerdict {
    let ev = sched.events();
    let samples: Vec<f64> = (0..=4 * (horizon_units + dead_units + 1))
        .map(|k| k as f64 * unit / 4.0)
        .collect();
    let mut shoot_through = false;
    for hb in 1..=4u8 {
        let highs: Vec<f64> = samples.iter().copied().filter(|&t| state_at(ev, hb, Switch::High, t)).collect();
        let lows: Vec<f64> = samples.iter().copied().filter(|&t| state_at(ev, hb, Switch::Low, t)).collect();
        for &h in &highs {
            for &l in &lows {
                if (h - l).abs() < dead_units as f64 * unit - 1e-12 || h == l {
                    shoot_through = true;
                }
            }
        }
    }
    let mut multiplex_conflict = false;
    for (s, _, px, _, py) in mux.shared() {
        for &t in &samples {
            let on = |hb: u8, sw: Switch| state_at(ev, hb, sw, t);
            let x_high = on(s, Switch::High) && on(px, Switch::Low);
            let x_low = on(s, Switch::Low) && on(px, Switch::High);
            let y_high = on(s, Switch::High) && on(py, Switch::Low);
            let y_low = on(s, Switch::Low) && on(py, Switch::High);
            if (x_high && y_low) || (x_low && y_high) {
                multiplex_conflict = true;
            }
        }
    }
    BruteVerdict {
        shoot_through,
        multiplex_conflict,
    }
}

/// Random schedule with event times on an integer grid of `unit`.
pub fn random_schedule<R: Rng>(rng: &mut R, max_events: usize, horizon_units: i64, unit: f64) -> GateSchedule {
    let n = rng.gen_range(1..=max_events);
    let events = (0..n)
        .map(|_| {
            GateEvent::new(
                rng.gen_range(0..=horizon_units) as f64 * unit,
                rng.gen_range(1..=4),
                if rng.gen_bool(0.5) { Switch::High } else { Switch::Low },
                if rng.gen_bool(0.6) { Action::On } else { Action::Off },
            )
        })
        .collect();
    GateSchedule::new(events).unwrap()
}

/// Every schedule of exactly `n` events drawn from times 0..=horizon.
pub fn all_schedules(n: usize, horizon_units: i64, unit: f64) -> Vec<GateSchedule> {
    let mut atoms = Vec::new();
    for t in 0..=horizon_units {
        for hb in 1..=4u8 {
            for sw in [Switch::High, Switch::Low] {
                for a in [Action::On, Action::Off] {
                    atoms.push(GateEvent::new(t as f64 * unit, hb, sw, a));
                }
            }
        }
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let events = idx.iter().map(|&i| atoms[i]).collect();
        out.push(GateSchedule::new(events).unwrap());
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            idx[k] += 1;
            if idx[k] < atoms.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
