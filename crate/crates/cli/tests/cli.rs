use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ridecomfort"))
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn golden_csv_reproduces_report_and_events() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let events = dir.path().join("events.jsonl");
    let plot = dir.path().join("plot.csv");
    let out = run(&[
        "--input",
        s(&golden("golden_ride.csv")),
        "--report",
        s(&report),
        "--events",
        s(&events),
        "--emit-plot-data",
        s(&plot),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(&report).unwrap(), std::fs::read(golden("golden_report.json")).unwrap());
    assert_eq!(std::fs::read(&events).unwrap(), std::fs::read(golden("golden_events.jsonl")).unwrap());

    let input_rows = std::fs::read_to_string(golden("golden_ride.csv")).unwrap().lines().count();
    let plot = std::fs::read_to_string(&plot).unwrap();
    assert_eq!(plot.lines().next(), Some("t_s,ax,ay,az"));
    assert_eq!(plot.lines().count(), input_rows);
}

#[test]
fn synth_mode_matches_committed_trace() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ride.csv");
    let out = run(&["--synth", s(&golden("golden_scenario.json")), "--emit-synth-csv", s(&csv)]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(golden("golden_ride.csv")).unwrap());
    assert_eq!(out.stdout, std::fs::read(golden("golden_report.json")).unwrap());
}

#[test]
fn threshold_flags_override_defaults() {
    let out = run(&["--input", s(&golden("golden_ride.csv")), "--accel-threshold", "7", "--lateral-threshold", "2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["counts"]["fast_acceleration"], 0);
    assert_eq!(v["counts"]["aggressive_cornering"], 0);
    assert_eq!(v["counts"]["hard_braking"], 1);
    assert_eq!(v["score"], 95.0);
}

#[test]
fn config_file_is_applied_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "[thresholds]\nbrake_x = 6.0\n").unwrap();
    let out = run(&["--input", s(&golden("golden_ride.csv")), "--config", s(&cfg)]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["counts"]["hard_braking"], 0);

    std::fs::write(&cfg, "[thresholds]\nbrake = 6.0\n").unwrap();
    let out = run(&["--input", s(&golden("golden_ride.csv")), "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn parse_errors_exit_3_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "t_s,ax,ay,az,gx,gy,gz\n0,0,0,9.8,0,0,0\n0.02,0,0,9.8,0,0\n").unwrap();
    let out = run(&["--input", s(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let out = run(&["--input", s(&dir.path().join("missing.csv"))]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["--input", s(&golden("golden_ride.csv")), "--time-constant=-1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn motionless_input_exits_4_naming_alignment() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("still.csv");
    let mut text = String::from("t_s,ax,ay,az,gx,gy,gz\n");
    for i in 0..1000 {
        text.push_str(&format!("{},0,0,9.80665,0,0,0\n", i as f64 * 0.02));
    }
    std::fs::write(&csv, text).unwrap();
    let out = run(&["--input", s(&csv)]);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("alignment stage") && err.contains("insufficient coverage"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["--input", "a.csv", "--synth", "b.json"]).status.code(), Some(2));
    assert_eq!(run(&["--input", "a.csv", "--emit-synth-csv", "c.csv"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_5() {
    let out = run(&["--input", s(&golden("golden_ride.csv")), "--report", "/nonexistent-dir/report.json"]);
    assert_eq!(out.status.code(), Some(5));
}
