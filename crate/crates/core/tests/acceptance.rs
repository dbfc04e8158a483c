//! The fourteen acceptance criteria. Each prints one PASS/FAIL line with the
//! figures it was judged on; the test fails if any criterion does.

mod common;

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dili::actuator::*;
use dili::constants::{MODULE_SIDE_UM, MU0};
use dili::experiments::*;
use dili::magnetics::*;
use dili::power::*;
use dili::world::{Heading, Module, Pose, World};
use dili::Surface;

use std::result::Result;

type Outcome = Result<String, String>;

fn check(cond: bool, what: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what)
    }
}

fn run(results: &mut Vec<bool>, n: usize, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) {
    let t0 = Instant::now();
    let out = f();
    let dt = t0.elapsed();
    let (ok, detail) = match out {
        Ok(d) if dt <= limit => (true, d),
        Ok(d) => (false, format!("{d}; took {dt:.2?}, limit {limit:?}")),
        Err(e) => (false, e),
    };
    let line = format!(
        "criterion {n:2} {name}: {} [{dt:.2?}] {detail}\n",
        if ok { "PASS" } else { "FAIL" }
    );
    // Straight to the handle so the line shows even when the harness captures output.
    std::io::stdout().lock().write_all(line.as_bytes()).unwrap();
    results.push(ok);
}

fn study_coil() -> Coil {
    Coil::study(250, 8e-3).unwrap()
}

fn pulse(i: f64) -> PulseWaveform {
    PulseWaveform::standard(i.abs(), Polarity::from_sign(i))
}

fn steps(
    drive: &MotorDrive,
    start: &LinearMotorState,
    dir: Direction,
    n: usize,
) -> Result<LinearMotorState, String> {
    let mut s = start.clone();
    let mut bank = CapacitorBank::module_default();
    let ctx = StepContext {
        surface: Surface::Glass,
        friction_force: 0.0,
    };
    for _ in 0..n {
        let (next, b, _) = drive
            .execute_step(&s, dir, &DriveMode::stable(), &bank, &ctx)
            .map_err(|e| e.to_string())?;
        s = next;
        bank = b;
    }
    Ok(s)
}

fn c01_commutation() -> Outcome {
    let fwd = step_sequence(Direction::Forward, 6).order();
    let rev = step_sequence(Direction::Reverse, 6).order();
    check(fwd == [3, 1, 2, 3, 1, 2], format!("forward {fwd:?}"))?;
    check(rev == [1, 3, 2, 1, 3, 2], format!("reverse {rev:?}"))?;
    let drive = MotorDrive::module_default().map_err(|e| e.to_string())?;
    let home = drive.home_state(Direction::Forward).map_err(|e| e.to_string())?;
    let a = steps(&drive, &home, Direction::Forward, 6)?;
    let b = steps(&drive, &a, Direction::Reverse, 6)?;
    let c = steps(&drive, &b, Direction::Forward, 6)?;
    check(
        b.sep_polarities == home.sep_polarities && b.slider_um == home.slider_um,
        format!("reverse did not return home: {b:?}"),
    )?;
    check(c == a, "forward after a round trip differs".into())?;
    Ok(format!("forward {fwd:?}, reverse {rev:?}, round trip exact"))
}

fn c02_stroke() -> Outcome {
    let drive = MotorDrive::module_default().map_err(|e| e.to_string())?;
    let home = drive.home_state(Direction::Forward).map_err(|e| e.to_string())?;
    let end = steps(&drive, &home, Direction::Forward, 6)?;
    let d = end.slider_um - home.slider_um;
    check(d == MODULE_SIDE_UM, format!("slider moved {d} um"))?;

    let mut w = World::new(Surface::Glass, drive);
    w.add_module(Module::new(1, Pose::new(0, 0))).map_err(|e| e.to_string())?;
    w.add_module(Module::new(2, Pose::new(0, MODULE_SIDE_UM))).map_err(|e| e.to_string())?;
    let r = w
        .slide(2, Heading::PosX, MODULE_SIDE_UM, &DriveMode::stable())
        .map_err(|e| e.to_string())?;
    let x = w.modules[&2].pose.x_um;
    check(r.trace.len() == 6 && x == MODULE_SIDE_UM, format!("world slide: {} steps to {x} um", r.trace.len()))?;
    Ok(format!("slider {:.1} mm, module pose {:.1} mm in 6 steps", d as f64 * 1e-3, x as f64 * 1e-3))
}

fn c03_hysteresis() -> Outcome {
    let m = MaterialParams::table1();
    let cfg = SolverConfig::default();
    let dh = cfg.dh_max(&m);
    let tip = MaterialParams::preset_loop_tip("table1").unwrap() * m.hc;
    let n = 400;
    let branch = |from: f64, to: f64| -> Vec<f64> {
        (1..=n).map(|i| from + (to - from) * i as f64 / n as f64).collect()
    };
    let mut cycle = branch(tip, -tip);
    cycle.extend(branch(-tip, tip));
    let run = |dh: f64| -> Result<(f64, Vec<f64>, Vec<f64>), String> {
        let (s0, init) = ja_trace(&m, JaState::DEMAGNETIZED, &branch(0.0, tip), dh).map_err(|e| e.to_string())?;
        let (s1, first) = ja_trace(&m, s0, &cycle, dh).map_err(|e| e.to_string())?;
        let (s2, second) = ja_trace(&m, s1, &cycle, dh).map_err(|e| e.to_string())?;
        let mut all = init;
        all.extend(&first);
        all.extend(&second);
        Ok(((s2.m - s1.m).abs() / m.ms, second, all))
    };
    // The first cycle still carries the entry from the initial curve; the
    // loop is judged on the cycle after it.
    let (closure, second, all) = run(dh)?;
    check(closure < 0.01, format!("loop closure {closure:.2e} Ms"))?;

    let neg: Vec<f64> = cycle.iter().map(|h| -h).collect();
    let (_, up) = ja_trace(&m, JaState::DEMAGNETIZED, &cycle, dh).map_err(|e| e.to_string())?;
    let (_, down) = ja_trace(&m, JaState::DEMAGNETIZED, &neg, dh).map_err(|e| e.to_string())?;
    check(up.iter().zip(&down).all(|(a, b)| *a == -*b), "loop is not exactly odd".into())?;
    let rod = RodState::study(m);
    let p = apply_pulse(&rod, &study_coil(), &pulse(20.0), &cfg).map_err(|e| e.to_string())?;
    let q = apply_pulse(&rod, &study_coil(), &pulse(-20.0), &cfg).map_err(|e| e.to_string())?;
    check(q == p.negated(), "pulse response is not exactly odd".into())?;

    let peak = all.iter().chain(&up).fold(0.0f64, |a, x| a.max(x.abs()));
    check(peak <= m.ms, format!("|M| reached {peak} > Ms"))?;

    let fine_cfg = SolverConfig {
        time_step: cfg.time_step / 2.0,
        dh_max_fraction: cfg.dh_max_fraction / 2.0,
        ..cfg
    };
    let (_, second_fine, _) = run(fine_cfg.dh_max(&m))?;
    let loop_diff = second
        .iter()
        .zip(&second_fine)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / m.ms;
    let pf = apply_pulse(&rod, &study_coil(), &pulse(20.0), &fine_cfg).map_err(|e| e.to_string())?;
    let pulse_diff = p
        .segments
        .iter()
        .zip(&pf.segments)
        .map(|(a, b)| (a.m - b.m).abs())
        .fold(0.0, f64::max)
        / m.ms;
    check(
        loop_diff < 0.005 && pulse_diff < 0.005,
        format!("halving changed the loop by {loop_diff:.2e} Ms and the pulse by {pulse_diff:.2e} Ms"),
    )?;
    Ok(format!(
        "closure {closure:.1e} Ms, odd exact, max |M| {:.3} Ms, halving {loop_diff:.1e} / {pulse_diff:.1e} Ms",
        peak / m.ms
    ))
}

fn c04_calibrated_remanence() -> Outcome {
    let anchors = AnchorSet {
        br: Some(0.03),
        bs: Some(0.2),
        hc: Some(48e3),
        ..AnchorSet::empty("table1")
    };
    let rep = calibrate(&anchors, 1, None).map_err(|e| e.to_string())?;
    let rod = RodState::study(rep.material);
    let cfg = SolverConfig::default();
    let mut parts = Vec::new();
    for i in [20.0, -20.0] {
        let out = apply_pulse(&rod, &study_coil(), &pulse(i), &cfg).map_err(|e| e.to_string())?;
        let b = flux_metrics(&out).b_center;
        let target = 0.03 * i.signum();
        check((b - target).abs() <= 0.1 * 0.03, format!("{i} A pulse leaves B_center {b:.5} T"))?;
        parts.push(format!("{i:+} A -> {b:+.5} T"));
    }
    Ok(parts.join(", "))
}

fn c05_demagnetization() -> Outcome {
    let m = MaterialParams::table1();
    let cfg = SolverConfig::default();
    check(cfg.demag_frequency == 2.0, format!("demag frequency {}", cfg.demag_frequency))?;
    let sat = apply_pulse(&RodState::study(m), &study_coil(), &pulse(20.0), &cfg).map_err(|e| e.to_string())?;
    let out = demagnetize(&sat, &study_coil(), 20.0, &cfg).map_err(|e| e.to_string())?;
    let worst = out.max_abs_m() / m.ms;
    check(worst < 0.05, format!("residual {worst:.4} Ms"))?;
    Ok(format!(
        "from {:.3} Ms to max |M| {worst:.2e} Ms over {} segments",
        sat.max_abs_m() / m.ms,
        out.segment_count()
    ))
}

fn c06_pulse_trend() -> Outcome {
    let pts = sweep_pulse_peak(&SweepSpec::pulse_peak()).map_err(|e| e.to_string())?;
    for w in pts.windows(2) {
        check(
            w[1].b_center >= w[0].b_center && w[1].b_average >= w[0].b_average,
            format!("decrease between {} and {} A", w[0].peak_current, w[1].peak_current),
        )?;
    }
    let at = |i: f64| pts.iter().find(|p| p.peak_current == i).copied().unwrap();
    let (p20, p30) = (at(20.0), at(30.0));
    let (rc, ra) = (p20.b_center / p30.b_center, p20.b_average / p30.b_average);
    check(rc >= 0.95 && ra >= 0.95, format!("20 A / 30 A ratios {rc:.4}, {ra:.4}"))?;
    Ok(format!("monotone over {} points, 20 A / 30 A = {rc:.4} (center), {ra:.4} (average)", pts.len()))
}

fn c07_turns_trend() -> Outcome {
    let pts = sweep_turns(&SweepSpec::turns()).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = pts.iter().map(|p| p.turns as f64).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.h_center).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    check(r2 > 0.999, format!("R^2 {r2}"))?;
    let b = |t: u32| pts.iter().find(|p| p.turns == t).unwrap().b_center;
    let (b200, b250, b300, b500) = (b(200), b(250), b(300), b(500));
    for w in pts.windows(2) {
        check(w[1].b_center >= w[0].b_center, format!("remanence drops after {} turns", w[0].turns))?;
    }
    let rel = (b300 - b250).abs() / b300;
    let rest = (b500 - b300) / b500;
    check(
        rel <= 0.05 && rest <= 0.05,
        format!("B(250) {b250:.5}, B(300) {b300:.5}, B(500) {b500:.5}"),
    )?;
    Ok(format!(
        "H_center R^2 {r2:.9}; remanent B at 200/250/300/500 turns = {b200:.5}/{b250:.5}/{b300:.5}/{b500:.5} T"
    ))
}

fn c08_coverage() -> Outcome {
    let prof = coverage_study(&SweepContext::default()).map_err(|e| e.to_string())?;
    let get = |w: Wrapping| prof.iter().find(|p| p.wrapping == w).unwrap();
    let (half, exact, extra) = (get(Wrapping::Half), get(Wrapping::Exact), get(Wrapping::Extra));
    let m = MaterialParams::table1();
    let sat = 0.9 * m.mr() / m.ms;
    let n = half.m_fraction.len();
    let ends = half.m_fraction[0].max(half.m_fraction[n - 1]);
    check(ends < 0.1, format!("half-wrap ends {ends:.4} Ms"))?;
    check(half.m_fraction[n / 2] >= sat, format!("half-wrap center {:.4} Ms", half.m_fraction[n / 2]))?;
    let low = exact.m_fraction.iter().copied().fold(f64::INFINITY, f64::min);
    check(low >= sat, format!("exact-wrap lowest segment {low:.4} Ms"))?;
    check(
        half.h_center > exact.h_center && exact.h_center > extra.h_center,
        format!("center fields {} {} {}", half.h_center, exact.h_center, extra.h_center),
    )?;
    Ok(format!(
        "half ends {ends:.3} Ms, exact lowest {low:.3} Ms (>= 0.9 Mr = {sat:.3} Ms), H center {:.0} > {:.0} > {:.0} A/m",
        half.h_center, exact.h_center, extra.h_center
    ))
}

fn c09_speed_table() -> Outcome {
    let rep = calibrate(&AnchorSet::published(), 1, None).map_err(|e| e.to_string())?;
    let t = speed_table(Some(&rep)).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for &(mode, surface, target) in MEASURED_SPEEDS.iter() {
        let v = t.get(mode, surface).unwrap();
        worst = worst.max((v - target).abs());
        check((v - target).abs() <= 2.0, format!("{mode:?}/{surface}: {v:.3} vs {target}"))?;
    }
    let mut spreads = Vec::new();
    for mode in TABLE_MODES {
        let row: Vec<f64> = Surface::ALL.iter().map(|&s| t.get(mode, s).unwrap()).collect();
        let spread = row.iter().copied().fold(f64::MIN, f64::max) - row.iter().copied().fold(f64::MAX, f64::min);
        check(spread <= 2.0, format!("{mode:?} spread {spread}"))?;
        if mode == ModeName::Enhanced {
            check(row.iter().all(|&v| v == row[0]), format!("enhanced row {row:?}"))?;
        }
        spreads.push(format!("{}: {spread:.3}", mode.name()));
    }
    Ok(format!("worst cell error {worst:.3} mm/s; spreads {}", spreads.join(", ")))
}

fn c10_holding() -> Outcome {
    let anchors = AnchorSet {
        holding_mn: Some(75.0),
        ..AnchorSet::empty("table1")
    };
    let rep = calibrate(&anchors, 1, None).map_err(|e| e.to_string())?;
    let model = rep.holding_model();
    let volts: Vec<f64> = (0..=32).map(|i| i as f64 * 0.5).chain([3.9]).collect();
    let counts: Vec<u32> = (1..=8).collect();
    let g = holding_force_grid(&model, &volts, &counts).map_err(|e| e.to_string())?;
    let one = g.force_mn[32][0];
    check((one - 75.0).abs() <= 7.5, format!("(16 V, 1 pulse) = {one:.3} mN"))?;
    for (i, &v) in volts.iter().enumerate() {
        if v < 4.0 {
            check(g.force_mn[i].iter().all(|&f| f == 0.0), format!("{v} V gives {:?}", g.force_mn[i]))?;
        }
        for j in 1..counts.len() {
            check(g.force_mn[i][j] >= g.force_mn[i][j - 1], format!("{v} V drops at {} pulses", counts[j]))?;
        }
    }
    for i in 1..=32 {
        for j in 0..counts.len() {
            check(g.force_mn[i][j] >= g.force_mn[i - 1][j], format!("drops between {} and {} V", volts[i - 1], volts[i]))?;
        }
    }
    let last = &g.force_mn[32];
    let tail = last[7] - last[6];
    check(tail <= 1e-3 * last[7], format!("16 V still rising by {tail} mN at 8 pulses"))?;
    Ok(format!(
        "(16 V, 1) = {one:.2} mN, (16 V, 8) = {:.2} mN, (8 V, 1..8) = {:.1}..{:.1} mN, zero below 4 V",
        last[7], g.force_mn[16][0], g.force_mn[16][7]
    ))
}

fn c11_electronics() -> Outcome {
    let mux = build_multiplex();
    let unit = 1e-3;
    let dt = DeadTimeConfig::new(unit).map_err(|e| e.to_string())?;
    let mut exhaustive = 0usize;
    for sched in common::all_schedules(3, 2, unit) {
        let r = validate_schedule(&sched, &mux, &dt);
        let b = common::brute_check(&sched, &mux, 1, unit, 2);
        check(
            r.has("ShootThrough") == b.shoot_through && r.has("MultiplexConflict") == b.multiplex_conflict,
            format!("validator and brute force disagree on\n{}", sched.to_text()),
        )?;
        exhaustive += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut fuzzed = 0usize;
    let mut caught = 0usize;
    for dead in [0i64, 1, 2, 4] {
        let dt = DeadTimeConfig::new(dead as f64 * unit).map_err(|e| e.to_string())?;
        for _ in 0..3000 {
            let sched = common::random_schedule(&mut rng, 10, 12, unit);
            let b = common::brute_check(&sched, &mux, dead, unit, 12);
            let passed = validate_schedule(&sched, &mux, &dt).is_ok();
            check(
                !(passed && (b.shoot_through || b.multiplex_conflict)),
                format!("unsafe schedule passed:\n{}", sched.to_text()),
            )?;
            caught += usize::from(!passed);
            fuzzed += 1;
        }
    }
    // Scheduler output must always be safe.
    let bank = CapacitorBank::module_default();
    for _ in 0..2000 {
        let dt = DeadTimeConfig::new(rng.gen_range(1e-6..0.05)).map_err(|e| e.to_string())?;
        let mut sched = PulseScheduler::new(mux.clone(), dt.clone());
        for _ in 0..rng.gen_range(1..10) {
            let pol = if rng.gen_bool(0.5) { Polarity::Positive } else { Polarity::Negative };
            sched
                .request(rng.gen_range(1..=3), pol, 0.42e-3, rng.gen_range(0.0..0.1), &bank)
                .map_err(|e| e.to_string())?;
        }
        let r = validate_schedule(sched.schedule(), &mux, &dt);
        check(r.is_ok(), format!("scheduler produced {:?}", r.violations))?;
        fuzzed += 1;
    }
    check(fuzzed >= 10_000, format!("only {fuzzed} schedules"))?;
    Ok(format!(
        "{exhaustive} three-event schedules agree with brute force; {fuzzed} fuzzed ({caught} rejected), none unsafe passed"
    ))
}

fn c12_energy() -> Outcome {
    let drive = MotorDrive::module_default().map_err(|e| e.to_string())?;
    let r = drive.coil.resistance;
    let timing = drive.timing;
    let mut w = World::new(Surface::Wood, drive);
    for col in -2..=3 {
        w.add_module(Module::new((col + 10) as u32, Pose::new(col * MODULE_SIDE_UM, 0)))
            .map_err(|e| e.to_string())?;
    }
    w.add_module(Module::new(1, Pose::new(0, MODULE_SIDE_UM))).map_err(|e| e.to_string())?;
    let a = w.slide(1, Heading::PosX, 15_000, &DriveMode::stable()).map_err(|e| e.to_string())?;
    let b = w.slide(1, Heading::NegX, 7_500, &DriveMode::enhanced()).map_err(|e| e.to_string())?;
    let pulses: f64 = w.energy.pulses.iter().sum();
    let cont: f64 = w.energy.continuous.iter().sum();
    let total = w.energy.total();
    check((total - (pulses + cont)).abs() <= 1e-15, format!("total {total} vs {pulses} + {cont}"))?;
    check((total - (a.energy + b.energy)).abs() <= 1e-12, "ledger disagrees with motion reports".into())?;
    // Continuous current integral, I^2 R t over each enhanced step.
    let settle = timing.effective_settle(&DriveMode::enhanced(), Surface::Wood);
    let expected = 3.0 * 0.8f64.powi(2) * r * settle;
    check(
        w.energy.continuous.len() == 3 && (cont - expected).abs() <= 1e-12 * expected,
        format!("continuous {cont} vs {expected}"),
    )?;
    check(
        w.energy.pulses.len() == 9 && w.energy.pulses.iter().all(|&e| e > 0.0),
        format!("{} pulse entries", w.energy.pulses.len()),
    )?;
    let before = w.energy.clone();
    w.hold(60.0).map_err(|e| e.to_string())?;
    check(w.energy == before, "holding drew energy".into())?;
    Ok(format!(
        "{:.4} J = {pulses:.4} J pulses + {cont:.4} J continuous; 60 s hold adds 0 J",
        total
    ))
}

fn c13_dipole() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    let vec = |rng: &mut ChaCha8Rng| {
        Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    };
    for _ in 0..100 {
        let m1 = vec(&mut rng);
        let m2 = vec(&mut rng);
        let mut dir = vec(&mut rng);
        while dir.norm() < 0.1 {
            dir = vec(&mut rng);
        }
        let dist = rng.gen_range(1e-3..0.05);
        let p1 = vec(&mut rng) * 0.01;
        let a = Dipole::new(m1, p1);
        let b = Dipole::new(m2, p1 + dir * (dist / dir.norm()));
        let f = dipole_force(&a, &b).map_err(|e| e.to_string())?;
        let h = 1e-6 * dist;
        let e = |d: Vec3| interaction_energy(&a, &Dipole::new(b.moment, b.position + d)).unwrap();
        let comp = |u: Vec3| (-e(u * 2.0 * h) + 8.0 * e(u * h) - 8.0 * e(u * -h) + e(u * -2.0 * h)) / (12.0 * h);
        let g = -Vec3::new(
            comp(Vec3::new(1.0, 0.0, 0.0)),
            comp(Vec3::new(0.0, 1.0, 0.0)),
            comp(Vec3::new(0.0, 0.0, 1.0)),
        );
        // Relative to the natural force scale, since the force itself can
        // vanish for some orientations.
        let scale = 3.0 * MU0 * m1.norm() * m2.norm() / (4.0 * PI * dist.powi(4));
        let rel = (f - g).norm() / scale;
        worst = worst.max(rel);
        check(rel <= 1e-6, format!("relative error {rel:.2e} at {a:?} {b:?}"))?;
    }
    Ok(format!("100 random configurations, worst relative error {worst:.2e}"))
}

fn c14_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cmds: [&[&str]; 6] = [
        &["hysteresis"],
        &["sweep-pulse"],
        &["sweep-turns"],
        &["coverage"],
        &["holding-force"],
        &["speed-test"],
    ];
    let run = |out: &str, args: &[&str]| -> Result<(), String> {
        let o = Command::new(env!("CARGO_BIN_EXE_dili"))
            .current_dir(dir.path())
            .args(args)
            .args(["--seed", "42", "--out", out])
            .output()
            .map_err(|e| e.to_string())?;
        check(o.status.success(), format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)))
    };
    let mut files = 0;
    for args in cmds {
        run("a", args)?;
        run("b", args)?;
    }
    for entry in std::fs::read_dir(dir.path().join("a")).map_err(|e| e.to_string())? {
        let p = entry.map_err(|e| e.to_string())?.path();
        if p.extension().and_then(|e| e.to_str()) != Some("csv") {
            continue;
        }
        let name = p.file_name().unwrap();
        let other = Path::new(dir.path()).join("b").join(name);
        let (x, y) = (std::fs::read(&p).map_err(|e| e.to_string())?, std::fs::read(&other).map_err(|e| e.to_string())?);
        check(!x.is_empty() && x == y, format!("{} differs", name.to_string_lossy()))?;
        files += 1;
    }
    check(files >= cmds.len(), format!("only {files} CSVs written"))?;
    Ok(format!("{files} CSVs byte-identical across two seeded runs"))
}

#[test]
fn acceptance_criteria() {
    let s = Duration::from_secs;
    let mut r = Vec::new();
    run(&mut r, 1, "commutation", s(1), c01_commutation);
    run(&mut r, 2, "stroke", s(1), c02_stroke);
    run(&mut r, 3, "hysteresis properties", s(10), c03_hysteresis);
    run(&mut r, 4, "calibrated remanence", s(10), c04_calibrated_remanence);
    run(&mut r, 5, "demagnetization", s(10), c05_demagnetization);
    run(&mut r, 6, "pulse peak trend", s(60), c06_pulse_trend);
    run(&mut r, 7, "turns trend", s(60), c07_turns_trend);
    run(&mut r, 8, "coil coverage", s(10), c08_coverage);
    run(&mut r, 9, "speed table", s(60), c09_speed_table);
    run(&mut r, 10, "holding force", s(60), c10_holding);
    run(&mut r, 11, "electronics safety", s(60), c11_electronics);
    run(&mut r, 12, "energy contract", s(10), c12_energy);
    run(&mut r, 13, "dipole force", s(10), c13_dipole);
    run(&mut r, 14, "determinism", s(60), c14_determinism);
    let failed: Vec<usize> = r.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
