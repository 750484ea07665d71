//! Acceptance suite: one PASS/FAIL line per criterion, criteria run one after
//! another so the runtimes are not skewed by each other.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use crossnav::config::{parse_config, Auto, RunSpec, Scenario};
use crossnav::scenarios::{execute, run, Outcome};
use crossnav::setup::build_system;
use crossnav_core::control::{ControlSchedule, Segment};
use crossnav_core::dynamics::{evolve, exact_step, EvolutionProblem, IntegratorConfig, QuantumState};
use crossnav_core::linalg::DensityMatrix;

/// Reference gaps for the four-level model.
const REFERENCE_SIDE_GAP: f64 = 2.43;
const REFERENCE_CENTRAL_GAP: f64 = 4.86;

type Check = Result<String, String>;

fn check(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_time(result: Check, elapsed: Duration, limit: Option<Duration>) -> Check {
    match (result, limit) {
        (Ok(d), Some(limit)) if elapsed > limit => Err(format!("{d}; runtime above {} s", limit.as_secs_f64())),
        (r, _) => r,
    }
}

fn lz_check() -> Check {
    let out = execute(&RunSpec::defaults(Scenario::LzCheck)).map_err(|e| e.to_string())?;
    let spec = RunSpec::defaults(Scenario::LzCheck);
    let mut worst = 0.0_f64;
    let mut at_vc = f64::NAN;
    for (i, m) in spec.velocity_multiples.iter().enumerate() {
        let sim = out.metric(&format!("p1_simulated_{}", i + 1)).ok_or("missing metric")?;
        let exact = out.metric(&format!("p1_closed_form_{}", i + 1)).ok_or("missing metric")?;
        worst = worst.max((sim - exact).abs());
        if *m == 1.0 {
            at_vc = sim;
        }
    }
    check(
        spec.lambda0 == 20.0 && worst <= 0.02 && (at_vc - 0.632).abs() <= 0.013,
        format!("max |P1 - closed form| = {worst:.2e}, P1(v_c) = {at_vc:.5}"),
    )
}

fn sudden_switch() -> Check {
    let mut spec = RunSpec::defaults(Scenario::TwoLevelSs);
    spec.gamma0.clear();
    let out = execute(&spec).map_err(|e| e.to_string())?;
    let f = out.final_fidelity.unwrap_or(f64::NAN);
    let t = out.total_time.unwrap_or(f64::NAN);
    let slack = out.metric("mt_hold_1_end_slack").unwrap_or(f64::NAN);
    let violations = out.metric("mt_violations").unwrap_or(f64::NAN);
    check(
        f >= 0.995 && (t - PI / spec.delta).abs() <= 1e-12 && slack.abs() <= 1e-6 && violations == 0.0,
        format!("F = {f:.12}, T - pi/delta = {:.1e}, MT end slack = {slack:.2e}, violations = {violations}", t - PI / spec.delta),
    )
}

fn four_level_closed() -> Check {
    let mut spec = RunSpec::defaults(Scenario::FourLevel);
    spec.gamma0.clear();
    let out = execute(&spec).map_err(|e| e.to_string())?;
    let f = out.final_fidelity.unwrap_or(f64::NAN);
    let t = out.total_time.unwrap_or(f64::NAN);
    let (lo, hi) = (1.5 * PI / REFERENCE_SIDE_GAP, 2.2 * PI / REFERENCE_SIDE_GAP);
    check(f >= 0.99 && (lo..=hi).contains(&t), format!("F = {f:.5}, T = {t:.4} in [{lo:.4}, {hi:.4}]"))
}

fn four_level_open(out: &Outcome) -> Check {
    let f = out.metric("open_1_final_fidelity").unwrap_or(f64::NAN);
    let p = out.metric("open_1_final_purity").unwrap_or(f64::NAN);
    let gamma = out.metric("open_1_gamma0").unwrap_or(f64::NAN);
    check(
        gamma == 1e-3 && (0.80..=0.90).contains(&f) && p < 1.0,
        format!("gamma0 = {gamma}, F = {f:.5} (window [0.80, 0.90]), purity = {p:.5}"),
    )
}

fn gamma_sweep() -> Check {
    let out = execute(&RunSpec::defaults(Scenario::GammaSweep)).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for g in ["1e-5", "0.0001", "0.001", "0.01"] {
        let sd = out.metric(&format!("S-D_{g}")).unwrap_or(f64::NAN);
        let ad = out.metric(&format!("A-D_{g}")).unwrap_or(f64::NAN);
        if g != "0.01" {
            ok &= sd > 0.8;
        }
        ok &= ad < sd;
        parts.push(format!("{g}: S-D {sd:.4} A-D {ad:.4}"));
    }
    check(ok, parts.join(", "))
}

fn oracle() -> Check {
    let mut worst = 0.0_f64;
    let mut runs = 0;
    for scenario in [Scenario::TwoLevelSs, Scenario::FourLevel] {
        let spec = RunSpec::defaults(scenario);
        let system = build_system(&spec).map_err(|e| e.to_string())?;
        let initial = system.diabatic.state(0).clone();
        let temperature = spec.temperature.resolve(system.delta_ref);
        for ac in &system.crossings {
            let duration = PI / ac.gap;
            let schedule = ControlSchedule::new(0.0, vec![Segment::Hold { lambda: ac.lambda_star, duration }])
                .map_err(|e| e.to_string())?;
            for gamma0 in [0.0, 1e-3, 1e-2] {
                let open = gamma0 > 0.0;
                let model = if open {
                    system.model.clone().with_bath(gamma0, temperature).map_err(|e| e.to_string())?
                } else {
                    system.model.clone()
                };
                let problem = EvolutionProblem {
                    model: model.clone(),
                    schedule: schedule.clone(),
                    initial: QuantumState::Pure(initial.clone()),
                    goal: DensityMatrix::from_pure(&initial),
                    diabatic: system.diabatic.clone(),
                    open_system: open,
                    delta_ref: system.delta_ref,
                    keep_states: false,
                };
                let traj = evolve(&problem, &IntegratorConfig::default()).map_err(|e| e.to_string())?;
                let start = if open {
                    QuantumState::Mixed(DensityMatrix::from_pure(&initial))
                } else {
                    QuantumState::Pure(initial.clone())
                };
                let exact = exact_step(&model, ac.lambda_star, duration, &start).map_err(|e| e.to_string())?;
                // Closed runs are compared as projectors; a global phase is
                // not observable.
                let d = traj.final_state.matrix().max_abs_diff(exact.to_density().matrix());
                worst = worst.max(d);
                runs += 1;
            }
        }
    }
    check(worst <= 1e-8, format!("{runs} holds, max entry distance {worst:.2e}"))
}

fn invariants(open: &Outcome, closed: &[&Outcome]) -> Check {
    let traj = open.trajectory_named("trajectory_open_1").ok_or("no open run")?;
    let d = traj.diagnostics;
    let point_trace = traj.points.iter().map(|p| p.trace_error).fold(0.0, f64::max);
    let trace = d.max_trace_error.max(point_trace);
    let min_eig = traj.points.iter().map(|p| p.min_eigenvalue).fold(d.min_eigenvalue, f64::min);
    let mut norm = 0.0_f64;
    for o in closed {
        for (_, t) in o.trajectories.iter().filter(|(_, t)| !t.open_system) {
            norm = norm.max(t.diagnostics.max_norm_drift);
        }
    }
    check(
        trace <= 1e-8 && d.max_hermiticity_correction <= 1e-9 && min_eig >= -1e-3 && norm <= 1e-7,
        format!(
            "|Tr rho - 1| <= {trace:.2e}, max hermiticity correction {:.2e}, min eigenvalue {min_eig:.2e}, closed norm drift {norm:.2e}",
            d.max_hermiticity_correction
        ),
    )
}

fn crossings() -> Check {
    let system = build_system(&RunSpec::defaults(Scenario::Spectrum)).map_err(|e| e.to_string())?;
    let acs = &system.crossings;
    let central: Vec<_> = acs.iter().filter(|c| c.lambda_star.abs() <= 1e-6).collect();
    let side: Vec<_> = acs.iter().filter(|c| c.lambda_star.abs() > 1e-6).collect();
    let central_ok = central.len() == 2 && central.iter().all(|c| (c.gap - REFERENCE_CENTRAL_GAP).abs() <= 0.02);
    let side_ok = side.len() == 2 && side.iter().all(|c| (c.gap - REFERENCE_SIDE_GAP).abs() <= 0.01);
    let symmetric = side.len() == 2 && (side[0].lambda_star + side[1].lambda_star).abs() <= 1e-6;
    let describe = |v: &[&crossnav_core::spectrum::AvoidedCrossing]| {
        v.iter().map(|c| format!("{:.7}@{:.7}", c.gap, c.lambda_star)).collect::<Vec<_>>().join(" ")
    };
    check(
        acs.len() == 4 && central_ok && side_ok && symmetric,
        format!(
            "{} crossings; central gaps {} (want {REFERENCE_CENTRAL_GAP} +- 0.02); side gaps {} (want {REFERENCE_SIDE_GAP} +- 0.01); symmetric {symmetric}",
            acs.len(),
            describe(&central),
            describe(&side)
        ),
    )
}

fn path_search() -> Check {
    let mut spec = RunSpec::defaults(Scenario::PathSearch);
    spec.start_label = Auto::Auto;
    spec.goal_label = Auto::Auto;
    let out = execute(&spec).map_err(|e| e.to_string())?;
    let result = out.search.as_ref().ok_or("no search result")?;
    let system = build_system(&spec).map_err(|e| e.to_string())?;
    let delta = system.delta_ref;
    let holds: Vec<f64> = (1..=2).filter_map(|i| out.metric(&format!("hold_{i}_duration"))).collect();
    let extra = out.metric("hold_3_duration").is_some();
    let mut sorted = holds.clone();
    sorted.sort_by(f64::total_cmp);
    let rel = |a: f64, b: f64| (a - b).abs() / b;
    let holds_ok = !extra
        && sorted.len() == 2
        && rel(sorted[0], PI / (2.0 * delta)) <= 1e-3
        && rel(sorted[1], PI / delta) <= 1e-3;
    let explored = result.candidates.len();
    check(
        result.best.pattern == "D-S-D-S" && holds_ok && result.best.fidelity >= 0.99 && explored <= 81,
        format!(
            "labels {} -> {}, pattern {}, holds {:?} vs pi/(2 delta) = {:.5}, pi/delta = {:.5} (delta = {delta:.5}), F = {:.5}, explored {explored}",
            result.start + 1,
            result.goal + 1,
            result.best.pattern,
            holds.iter().map(|h| format!("{h:.5}")).collect::<Vec<_>>(),
            PI / (2.0 * delta),
            PI / delta,
            result.best.fidelity
        ),
    )
}

/// Reduced settings for the slow scenarios; the code paths are the same.
fn determinism_spec(scenario: Scenario) -> RunSpec {
    let mut spec = RunSpec::defaults(scenario);
    match scenario {
        Scenario::TwoLevelAdiabatic => {
            spec.adiabatic_fraction = 0.2;
            spec.gamma0 = vec![1e-3];
        }
        Scenario::GammaSweep => {
            spec.adiabatic_fraction = 0.2;
            spec.gamma0 = vec![1e-3, 1e-2];
        }
        _ => {}
    }
    spec
}

fn csv_bytes(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap_or_default()))
        .collect();
    files.sort();
    Ok(files)
}

fn determinism() -> Check {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    let mut mismatched = Vec::new();
    for scenario in Scenario::ALL {
        let parsed = parse_config(&determinism_spec(scenario).serialize()).map_err(|e| e.to_string())?;
        let mut runs = Vec::new();
        for k in 0..2 {
            let dir = root.path().join(format!("{}-{k}", scenario.name()));
            run(&parsed, Some(&dir)).map_err(|e| format!("{scenario}: {e}"))?;
            runs.push(csv_bytes(&dir)?);
        }
        if runs[0].is_empty() || runs[0] != runs[1] {
            mismatched.push(scenario.name());
        }
        compared += runs[0].len();
    }
    check(
        mismatched.is_empty(),
        format!("{compared} CSV files across {} scenarios compared byte for byte; mismatches: {mismatched:?}", Scenario::ALL.len()),
    )
}

fn report(n: usize, name: &str, result: Check, elapsed: Duration, limit: Option<Duration>) -> bool {
    let result = within_time(result, elapsed, limit);
    let (tag, detail) = match &result {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("criterion {n:>2} {tag}  {name}: {detail} [{:.2} s]", elapsed.as_secs_f64());
    result.is_ok()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut passed = Vec::new();

    let (r, t) = timed(lz_check);
    passed.push(report(1, "LZ formula", r, t, Some(secs(5))));
    let (r, t) = timed(sudden_switch);
    passed.push(report(2, "sudden-switch time optimality", r, t, Some(secs(1))));
    let (r, t) = timed(four_level_closed);
    passed.push(report(3, "four-level closed D-S-D-S", r, t, Some(secs(10))));

    let (four, t) = timed(|| execute(&RunSpec::defaults(Scenario::FourLevel)));
    let r = match &four {
        Ok(out) => four_level_open(out),
        Err(e) => Err(e.to_string()),
    };
    passed.push(report(4, "four-level open run", r, t, Some(secs(30))));

    let (r, t) = timed(gamma_sweep);
    passed.push(report(5, "S-D against A-D sweep", r, t, Some(secs(600))));
    let (r, t) = timed(oracle);
    passed.push(report(6, "oracle equivalence", r, t, Some(secs(5))));

    let (r, t) = timed(|| {
        let open = four.as_ref().map_err(|e| e.to_string())?;
        let mut ss = RunSpec::defaults(Scenario::TwoLevelSs);
        ss.gamma0.clear();
        let two = execute(&ss).map_err(|e| e.to_string())?;
        invariants(open, &[open, &two])
    });
    passed.push(report(7, "generator invariants", r, t, None));

    let (r, t) = timed(crossings);
    passed.push(report(8, "crossing detection", r, t, None));
    let (r, t) = timed(path_search);
    passed.push(report(9, "path search", r, t, Some(secs(120))));
    let (r, t) = timed(determinism);
    passed.push(report(10, "determinism", r, t, None));

    let n = passed.iter().filter(|p| **p).count();
    println!("acceptance: {n}/{} criteria passed", passed.len());
    if n == passed.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
