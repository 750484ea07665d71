use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use crossnav::config::{parse_config, Scenario};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crossnav"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn every_fixture_parses_and_names_its_scenario() {
    for sc in Scenario::ALL {
        let path = fixtures().join(format!("{}.conf", sc.name()));
        let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let parsed = parse_config(&text).unwrap();
        assert_eq!(parsed.spec.scenario, sc);
    }
}

#[test]
fn scenario_command_writes_outputs_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["scenario", "spectrum", "--set", "scan_points=101", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    for name in ["spectrum.csv", "crossings.csv", "report.txt"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let spectrum = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(spectrum.lines().count(), 102);
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    for field in ["max_trace_error", "min_eigenvalue", "max_norm_drift", "final_fidelity", "total_time"] {
        assert!(report.contains(field), "report lacks {field}");
    }
    assert!(report.contains("scan_points = 101\n"));
    assert!(report.contains("delta_a = 50  # default"));
}

#[test]
fn run_command_on_a_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().arg("run").arg(fixtures().join("two-level-ss.conf")).arg("--out-dir").arg(dir.path()).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("total_time: 3.141592653589793"), "{stdout}");
    let traj = fs::read_to_string(dir.path().join("trajectory_closed.csv")).unwrap();
    assert!(traj.starts_with("t,tau,lambda,fidelity,purity,p_1,p_2,trace_error,min_eig\n"));
    assert!(dir.path().join("trajectory_gamma_2.csv").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "scenario = four-level\n[bath]\ngamma0 = -1\n").unwrap();
    let out = bin().arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gamma0"), "{}", stderr(&out));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let out = bin().args(["scenario", "spectrum", "--set", "bogus=1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().arg("search").arg(fixtures().join("four-level.conf")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().arg("run").arg(dir.path().join("missing.conf")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn positivity_breach_exits_with_three() {
    // Far below the level splitting the generator is not completely positive.
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["scenario", "two-level-ss", "--set", "gamma0=0.5", "--set", "temperature=0.01", "--set", "lambda0=5", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("eigenvalue"), "{}", stderr(&out));
    assert!(!dir.path().join("report.txt").exists());
}

#[test]
fn unwritable_output_is_a_failure() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    fs::write(&file, "").unwrap();
    let out = bin().args(["scenario", "spectrum", "--set", "scan_points=51", "--out-dir"]).arg(&file).output().unwrap();
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn search_fixture_with_fixed_labels() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("search.conf");
    fs::write(&conf, "[schedule]\nstart_label = 1\ngoal_label = 2\n").unwrap();
    let out = bin().arg("search").arg(&conf).arg("--out-dir").arg(dir.path().join("out")).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let candidates = fs::read_to_string(dir.path().join("out/candidates.csv")).unwrap();
    assert_eq!(candidates.lines().count(), 37);
    let report = fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    assert!(report.contains("pattern = D-S-D-S\n"), "{report}");
}

#[test]
fn same_start_and_goal_is_an_empty_protocol() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["scenario", "path-search", "--set", "start_label=3", "--set", "goal_label=3", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("closed_fidelity = 1\n"));
    assert!(report.contains("explored = 1\n"));
}

#[test]
fn zero_steps_finds_no_path() {
    let out = bin()
        .args(["scenario", "path-search", "--set", "start_label=1", "--set", "goal_label=2", "--set", "max_steps=0"])
        .arg("--out-dir")
        .arg(tempfile::tempdir().unwrap().path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no path"), "{}", stderr(&out));
}
