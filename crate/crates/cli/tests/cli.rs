use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use carpet_lab::classify::InvariantProfile;
use serde_json::Value;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carpet-lab"))
        .env_remove("CARPET_LAB_PRECISION")
        .args(args)
        .output()
        .unwrap()
}

fn error_code(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is one JSON document");
    assert_eq!(v["schema"], "carpet-lab/1");
    v["code"].as_str().unwrap().to_string()
}

fn temp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("carpet-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn analyze_round_trips_to_profile() {
    let out = run(&["analyze", &data("fig1b.json")]);
    assert!(out.status.success());
    let p: InvariantProfile = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(p.fiber, vec![4, 3, 4, 2]);
    assert_eq!(p.delta_max.unwrap().exact.as_deref(), Some("1/6"));
    assert!(p.ve_witness.is_some());
}

#[test]
fn errors_are_json_with_status_one() {
    let out = run(&["analyze", "/nonexistent/carpet.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_code(&out), "cli.io");

    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_code(&out), "cli.usage");

    let out = run(&["--precision", "8", "analyze", &data("fig1a.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_code(&out), "cli.bad_precision");

    let out = run(&["curve", &data("fig1a.json"), "--t", "x/y"]);
    assert_eq!(error_code(&out), "cli.bad_number");

    let out = run(&["index", &data("fig1a.json"), &data("fig1b.json")]);
    assert_eq!(error_code(&out), "cli.bad_json");
}

#[test]
fn invalid_carpet_is_reported() {
    let path = temp("bad.json");
    std::fs::write(&path, r#"{"n": 3, "m": 3, "digits": [[0,0]]}"#).unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(error_code(&out).starts_with("carpet."));
}

#[test]
fn help_and_version_exit_zero() {
    assert!(run(&["--help"]).status.success());
    assert!(run(&["--version"]).status.success());
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_carpet-lab"))
        .env("CARPET_LAB_PRECISION", "20")
        .args(["analyze", &data("fig1b.json")])
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["sigma"]["precision"], 20);
    assert_eq!(v["sigma"]["decimal"].as_str().unwrap().len(), 22);
}

#[test]
fn render_cells_and_limits() {
    let out = run(&["render", &data("fig1a.json"), "--depth", "2"]);
    assert!(out.status.success());
    let svg = String::from_utf8(out.stdout).unwrap();
    // One border rect plus 13^2 cells.
    assert_eq!(svg.matches("<rect").count(), 1 + 169);

    let out = run(&["render", &data("fig1a.json"), "--depth", "7"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_code(&out), "cli.too_deep");
}

#[test]
fn overlay_only_when_witness_exists() {
    let path = temp("no_witness.json");
    std::fs::write(&path, r#"{"n": 3, "m": 2, "digits": [[0,0],[1,1]]}"#).unwrap();
    let p = path.to_str().unwrap();
    let plain = run(&["render", p, "--depth", "3"]).stdout;
    let marked = run(&["render", p, "--depth", "3", "--overlay"]).stdout;
    assert_eq!(plain, marked);

    let marked = run(&["render", &data("fig1a.json"), "--depth", "1", "--overlay"]).stdout;
    assert_eq!(String::from_utf8(marked).unwrap().matches("<circle").count(), 1);
}

#[test]
fn compare_strict_exits_zero_on_definite_verdict() {
    let out = run(&["compare", &data("fig1a.json"), &data("fig1b.json"), "--strict"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["outcome"], "not-equivalent");
}

#[test]
fn oracle_reports_both_checks() {
    let out = run(&["oracle", &data("fig1a.json"), "--coding", &data("ve_witness_1a.json"), "--r", "1/4096", "--rho", "1/1024"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["lemma31"], "pass");
    assert_eq!(v["lemma32"], "pass");
    assert_eq!(v["kOfR"], 3);
}

#[test]
fn beta_csv_has_requested_rows() {
    let out = run(&["beta", &data("fig1a.json"), &data("ve_witness_1a.json"), "--depth", "12"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,ell,beta_zero,beta_top,beta");
    assert_eq!(lines.len(), 13);
}

#[test]
fn doubling_carpet_gamma_not_applicable() {
    let path = temp("const.json");
    std::fs::write(&path, r#"{"prefix": [], "period": [[0,0]]}"#).unwrap();
    let out = run(&["index", &data("doubling.json"), path.to_str().unwrap(), "--index", "gamma"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_code(&out), "index.not_applicable");
}

#[test]
fn output_flag_writes_file() {
    let path = temp("analyze.json");
    let out = run(&["analyze", &data("fig1a.json"), "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["a0"], 3);
}
