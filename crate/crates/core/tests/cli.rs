use std::path::Path;
use std::process::{Command, Output};

use qjacobi::harness::io::parse_spectral_function;
use qjacobi::harness::parse_report;

fn qjacobi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qjacobi")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn passing_suite_exits_zero_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.jsonl");
    let cfg = write(dir.path(), "c.json", r#"{"params":"ps1","suites":["theta"]}"#);
    let out = qjacobi(&["verify", "--config", &cfg, "--report", report.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let (checks, summary) = parse_report(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c.passed && c.suite == "theta"));
    assert_eq!(summary.seed, 3);
    assert_eq!(summary.failed, 0);
    assert_eq!(summary.total, checks.len());
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.jsonl");
    let cfg = write(dir.path(), "c.json", r#"{"params":"ps4","suites":["spectrum"]}"#);
    let out = qjacobi(&["verify", "--config", &cfg, "--report", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let (_, summary) = parse_report(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(summary.failed > 0);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown_preset.json", r#"{"params":"ps9","suites":["theta"]}"#),
        ("unknown_field.json", r#"{"params":"ps1","colour":"blue"}"#),
        ("bad_window.json", r#"{"params":"ps1","window":[3,10],"suites":["theta"]}"#),
        ("unknown_suite.json", r#"{"params":"ps1","suites":["nonsense"]}"#),
        ("not_json.json", "params = ps1"),
    ];
    for (name, text) in cases {
        let cfg = write(dir.path(), name, text);
        let out = qjacobi(&["verify", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = qjacobi(&["verify", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn suites_are_listed() {
    let out = qjacobi(&["suites"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for s in ["theta", "grid", "eigen", "polynomial", "spectral", "orthogonality", "spectrum", "plancherel", "transform"] {
        assert!(text.lines().any(|l| l.starts_with(&format!("{s}:"))), "missing {s}");
    }
}

#[test]
fn transform_prints_spectral_function_and_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"params":"ps1","window":[-30,10]}"#);
    let input = write(dir.path(), "f.txt", "+ 2 1 0\n- -3 0.5 -0.25\n+ -1 0 1\n");
    let out = qjacobi(&["transform", "--config", &cfg, "--in", &input, "--roundtrip"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let (spectral, rest) = text.split_once("# roundtrip max error ").expect("roundtrip section");
    let parsed = parse_spectral_function(spectral).unwrap();
    assert!(!parsed.nodes.is_empty());
    let err: f64 = rest.lines().next().unwrap().trim().parse().unwrap();
    assert!(err < 1e-6, "roundtrip error {err}");
}

#[test]
fn transform_rejects_support_outside_window() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"params":"ps1","window":[-30,10]}"#);
    let input = write(dir.path(), "f.txt", "+ 25 1 0\n");
    let out = qjacobi(&["transform", "--config", &cfg, "--in", &input]);
    assert_eq!(out.status.code(), Some(2));
}
