//! The `z2gauge` binary: exit statuses, output formats and overrides.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_z2gauge");

fn run_with(dir: &Path, toml: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("exp.toml");
    std::fs::write(&cfg, toml).unwrap();
    Command::new(BIN).arg("run").arg(&cfg).args(extra).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const EXPANSION: &str = r#"
task = "verify-current-expansion"
[complex]
m = 3
extents = [2, 2, 1]
[coupling]
betas = [0.2, 0.7]
[[loops]]
kind = "plaquette"
index = 0
"#;

#[test]
fn passing_checks_exit_zero_with_header_first() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(dir.path(), EXPANSION, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let head: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    for key in ["timestamp", "version", "rng_algorithm", "config_hash", "config"] {
        assert!(head["header"].get(key).is_some(), "missing {key}");
    }
    let records: Vec<serde_json::Value> = lines.map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|r| r["record"]["pass"] == true));
}

#[test]
fn csv_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let o = run_with(dir.path(), EXPANSION, &["--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    assert_eq!(lines.next().unwrap(), "check,gamma,params,lhs,rhs,metric,pass");
    assert_eq!(lines.count(), 2);
}

#[test]
fn zero_sweeps_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let toml = r#"
task = "estimate"
[complex]
m = 3
extents = [2, 2, 1]
[coupling]
beta = 0.4
[chain]
sweeps = 0
[[loops]]
kind = "plaquette"
index = 0
"#;
    let o = run_with(dir.path(), toml, &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweeps"));
}

#[test]
fn malformed_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run_with(dir.path(), &format!("bogus = 1\n{EXPANSION}"), &[])), 2);
    assert_eq!(code(&run_with(dir.path(), &EXPANSION.replace("betas = [0.2, 0.7]", "beta = -1.0"), &[])), 2);
    assert_eq!(code(&run_with(dir.path(), &EXPANSION.replace("extents = [2, 2, 1]", "extents = [2, 2]"), &[])), 2);
    assert_eq!(code(&run_with(dir.path(), &EXPANSION.replace("index = 0", "index = 7"), &[])), 2);
}

#[test]
fn missing_config_is_an_io_error() {
    let o = Command::new(BIN).args(["run", "/nonexistent/exp.toml"]).output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn strong_coupling_area_law_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let toml = r#"
task = "area-law"
[complex]
m = 3
extents = [3, 3, 2]
[coupling]
betas = [0.05, 0.2]
[[loops]]
kind = "plaquette"
index = 0
"#;
    let o = run_with(dir.path(), toml, &[]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l.contains("\"refusal\"")));
    // the admissible coupling still produced its record
    assert!(text.lines().any(|l| l.contains("\"record\"")));
}

#[test]
fn seed_override_changes_payload_and_hash() {
    let dir = tempfile::tempdir().unwrap();
    let toml = r#"
task = "estimate"
[complex]
m = 3
extents = [2, 2, 1]
[coupling]
beta = 0.4
[chain]
sweeps = 500
[rng]
seed = 1
[[loops]]
kind = "plaquette"
index = 0
"#;
    let a = run_with(dir.path(), toml, &[]);
    let b = run_with(dir.path(), toml, &["--seed", "2"]);
    let split = |o: &Output| {
        let t = String::from_utf8(o.stdout.clone()).unwrap();
        let (h, p) = t.split_once('\n').unwrap();
        let h: serde_json::Value = serde_json::from_str(h).unwrap();
        (h["header"]["config_hash"].as_str().unwrap().to_string(), p.to_string())
    };
    let (ha, pa) = split(&a);
    let (hb, pb) = split(&b);
    assert_ne!(ha, hb);
    assert_ne!(pa, pb);
    assert_eq!(split(&run_with(dir.path(), toml, &["--threads", "3"])).1, pa);
}
