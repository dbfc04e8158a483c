use dili::actuator::*;
use dili::constants::{MODULE_SIDE_UM, STEP_UM};
use dili::power::CapacitorBank;
use dili::Surface;
use proptest::prelude::*;

const PATTERNS: [[i8; 3]; 6] = [
    [1, -1, 1],
    [-1, -1, 1],
    [-1, 1, 1],
    [-1, 1, -1],
    [1, 1, -1],
    [1, -1, -1],
];

fn glass() -> StepContext {
    StepContext {
        surface: Surface::Glass,
        friction_force: 0.0,
    }
}

fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) < 0.0, "no sign change in [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) * flo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn step_orders() {
    assert_eq!(step_sequence(Direction::Forward, 6).order(), vec![3, 1, 2, 3, 1, 2]);
    assert_eq!(step_sequence(Direction::Reverse, 6).order(), vec![1, 3, 2, 1, 3, 2]);
    assert!(step_sequence(Direction::Forward, 0).is_empty());
}

#[test]
fn every_pattern_has_a_restoring_equilibrium() {
    let drive = MotorDrive::module_default().unwrap();
    let m = drive.remanent_moment();
    for p in PATTERNS {
        let s = LinearMotorState::new(p, m).unwrap();
        let x0 = equilibrium_um(p).unwrap() as f64 * 1e-6;
        let f = |x: f64| motor_force_at(&s, x).unwrap();
        let root = bisect_root(f, x0 - 1e-3, x0 + 1e-3);
        assert!((root - x0).abs() < 1e-6, "{p:?}: root {root} vs {x0}");
        // Restoring: pushes back toward the equilibrium from either side.
        assert!(f(x0 + 2e-4) < 0.0 && f(x0 - 2e-4) > 0.0, "{p:?}");
    }
}

#[test]
fn demagnetized_motor_has_no_force() {
    let s = LinearMotorState::new([0, 0, 0], 0.04).unwrap();
    for x in [0.0, 1e-3, 7.3e-3] {
        assert_eq!(motor_force_at(&s, x).unwrap(), 0.0);
    }
}

#[test]
fn stable_step_on_glass_is_reliable_and_holds_no_current() {
    let drive = MotorDrive::module_default().unwrap();
    let s = drive.home_state(Direction::Forward).unwrap();
    let bank = CapacitorBank::module_default();
    let (after, _, r) = drive
        .execute_step(&s, Direction::Forward, &DriveMode::stable(), &bank, &glass())
        .unwrap();
    assert!(r.reliable);
    assert_eq!(r.sep, 3);
    assert_eq!(r.hold_energy, 0.0);
    assert_eq!(after.slider_um, s.slider_um + STEP_UM);
    assert!(after.at_equilibrium());
}

#[test]
fn starved_fastest_pulse_is_unreliable() {
    let drive = MotorDrive::module_default().unwrap();
    let s = drive.home_state(Direction::Forward).unwrap();
    let mode = DriveMode {
        recharge_threshold: 0.0,
        ..DriveMode::fastest()
    };
    let bank = CapacitorBank::module_default().with_voltage(5.0).unwrap();
    let (_, _, r) = drive
        .execute_step(&s, Direction::Forward, &mode, &bank, &glass())
        .unwrap();
    assert!(!r.reliable, "{r:?}");
    assert!(r.peak_current < 0.5 * 16.0 / drive.coil.resistance);
    assert!(r.sep_moment.abs() < drive.remanent_moment().abs());
}

#[test]
fn friction_above_peak_force_stalls() {
    let drive = MotorDrive::module_default().unwrap();
    let s = drive.home_state(Direction::Forward).unwrap();
    let ctx = StepContext {
        surface: Surface::Wood,
        friction_force: 1.0,
    };
    let err = drive
        .execute_step(&s, Direction::Forward, &DriveMode::stable(), &CapacitorBank::module_default(), &ctx)
        .unwrap_err();
    assert!(matches!(err, ActuatorError::Stall { .. }));
}

#[test]
fn six_steps_cover_one_module_and_round_trip() {
    let drive = MotorDrive::module_default().unwrap();
    let mode = DriveMode::stable();
    let start = drive.home_state(Direction::Forward).unwrap();
    let run = |s: &LinearMotorState, dir: Direction| {
        let mut s = s.clone();
        let mut bank = CapacitorBank::module_default();
        for _ in 0..6 {
            let (n, b, _) = drive.execute_step(&s, dir, &mode, &bank, &glass()).unwrap();
            s = n;
            bank = b;
        }
        s
    };
    let fwd = run(&start, Direction::Forward);
    assert_eq!(fwd.slider_um - start.slider_um, MODULE_SIDE_UM);
    assert_eq!(fwd.sep_polarities, start.sep_polarities);
    let back = run(&fwd, Direction::Reverse);
    assert_eq!(back.slider_um, start.slider_um);
    assert_eq!(back.sep_polarities, start.sep_polarities);
    assert_eq!(run(&back, Direction::Forward), fwd);
}

#[test]
fn mode_speeds_are_ordered_on_every_surface() {
    let drive = MotorDrive::module_default().unwrap();
    let bank = CapacitorBank::module_default();
    let r = drive.coil.resistance;
    for surface in Surface::ALL {
        let v = |m: DriveMode| predict_speed(&m, surface, &drive.timing, r, &bank).unwrap();
        let (f, s, e) = (v(DriveMode::fastest()), v(DriveMode::stable()), v(DriveMode::enhanced()));
        assert!(f > s && s > e, "{surface}: {f} {s} {e}");
    }
}

#[test]
fn enhanced_current_boosts_force() {
    let drive = MotorDrive::module_default().unwrap();
    let s = drive.home_state(Direction::Forward).unwrap();
    let bank = CapacitorBank::module_default();
    let step = |m: DriveMode| {
        drive
            .execute_step(&s, Direction::Forward, &m, &bank, &glass())
            .unwrap()
            .2
    };
    let stable = step(DriveMode::stable());
    let enhanced = step(DriveMode::enhanced());
    assert!(enhanced.peak_force > stable.peak_force);
    assert!(enhanced.hold_energy > 0.0);
    let rod = drive.reference(1);
    assert!(drive.boosted_moment(&rod, 1, 0.8).unwrap() > drive.remanent_moment());
}

#[test]
fn stepping_off_equilibrium_is_refused() {
    let drive = MotorDrive::module_default().unwrap();
    let s = drive.home_state(Direction::Forward).unwrap();
    let moved = s.at_um(s.slider_um + 100);
    let err = drive
        .execute_step(&moved, Direction::Forward, &DriveMode::stable(), &CapacitorBank::module_default(), &glass())
        .unwrap_err();
    assert!(matches!(err, ActuatorError::NotAtEquilibrium { .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mirror_negates_force(idx in 0usize..6, x_um in -15_000i64..15_000) {
        let s = LinearMotorState::new(PATTERNS[idx], 0.037).unwrap();
        let x = x_um as f64 * 1e-6;
        let f = motor_force_at(&s, x).unwrap();
        let g = motor_force_at(&s.mirrored(), -x).unwrap();
        prop_assert!((f + g).abs() <= 1e-9 * f.abs().max(1e-9));
    }

    #[test]
    fn flipping_all_seps_negates_force(idx in 0usize..6, x_um in -15_000i64..15_000) {
        let p = PATTERNS[idx];
        let s = LinearMotorState::new(p, 0.037).unwrap();
        let flipped = LinearMotorState::with_moments(p, s.sep_moments.map(|m| -m)).unwrap();
        let x = x_um as f64 * 1e-6;
        let f = motor_force_at(&s, x).unwrap();
        let g = motor_force_at(&flipped, x).unwrap();
        prop_assert!((f + g).abs() <= 1e-12 * f.abs().max(1e-12));
    }

    #[test]
    fn force_is_periodic(idx in 0usize..6, x_um in -15_000i64..15_000) {
        let s = LinearMotorState::new(PATTERNS[idx], 0.037).unwrap();
        let x = x_um as f64 * 1e-6;
        let f = motor_force_at(&s, x).unwrap();
        let g = motor_force_at(&s, x + s.period).unwrap();
        prop_assert!((f - g).abs() <= 1e-3 * f.abs().max(1e-6));
    }
}
