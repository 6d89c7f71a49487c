use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vbroadcast"));
    cmd.env_remove("VBROADCAST_CONFIG");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

fn export(name: &str, dir: &Path) -> String {
    let path = dir.join(format!("{name}.json"));
    let p = path.to_str().unwrap().to_string();
    assert!(run(&["export", name, "--out", &p]).status.success());
    p
}

#[test]
fn verify_cloner_file() {
    let dir = tempfile::tempdir().unwrap();
    let cloner = export("cloner", dir.path());
    let out = run(&["verify", "--choi", &cloner, "--require", "cp,phase,flip,swap"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["completely_positive"], true);
    assert_eq!(v["pass"], true);
}

#[test]
fn failed_requirement_exits_two() {
    let out = run(&["verify", "--choi", "cloner", "--require", "broadcast"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn distance_to_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let x = export("optimal", dir.path());
    let out = run(&["distance", "--a", &x, "--b", &x, "--starts", "2"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["value"].as_f64().unwrap(), 0.0);
    assert_eq!(v["certified"], true);
}

#[test]
fn distance_to_cloner() {
    let out = run(&["distance", "--a", "optimal", "--b", "cloner", "--starts", "8", "--require-certified"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["value"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-6);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["minimize", "--bogus"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"dim_in\": 2}").unwrap();
    let out = run(&["verify", "--choi", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));
    assert_eq!(run(&["verify", "--choi", "/nonexistent/x.json"]).status.code(), Some(1));
}

#[test]
fn config_from_env_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "[sampling]\nepsilon = 0.1\n").unwrap();
    let out = bin().env("VBROADCAST_CONFIG", &cfg).args(["sample-report"]).output().unwrap();
    assert_eq!(json(&out)["n1"], 738);
    let out = bin()
        .env("VBROADCAST_CONFIG", &cfg)
        .args(["sample-report", "--epsilon", "0.05"])
        .output()
        .unwrap();
    assert_eq!(json(&out)["n1"], 2952);
    let out = run(&["sample-report", "--config", cfg.to_str().unwrap()]);
    assert_eq!(json(&out)["n1"], 738);
}

#[test]
fn csv_format() {
    let out = run(&["sample-report", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.lines().any(|l| l.starts_with("ratio,1.388")));
}

#[test]
fn simulate_is_deterministic_and_exports_errors() {
    let args = ["simulate", "--shots", "3000", "--seed", "5"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("errors.csv");
    let out = run(&[
        "simulate",
        "--repetitions",
        "100",
        "--shots",
        "500",
        "--errors-csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(json(&out)["repetitions"], 100);
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 101);
}

#[test]
fn derive_family_and_decompose_files() {
    let dir = tempfile::tempdir().unwrap();
    let twirled = dir.path().join("twirled.json");
    let out = run(&["derive-family", "--seed", "3", "--out", twirled.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v["params"]["c1"][1].as_f64().unwrap().abs() < 1e-12);

    let parts = dir.path().join("parts");
    let out = run(&["decompose", "--choi", "optimal", "--out-dir", parts.to_str().unwrap()]);
    let v = json(&out);
    assert!((v["cost"].as_f64().unwrap() - 5.0 / 3.0).abs() < 1e-10);
    assert!(parts.join("e_plus.json").exists() && parts.join("e_minus.json").exists());
    let out = run(&["verify", "--choi", parts.join("e_minus.json").to_str().unwrap(), "--require", "cp"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn baseline_and_minimize() {
    let out = run(&["baseline", "--states", "20"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["cost_lower"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!((v["diamond_to_universal_cloner"].as_f64().unwrap() - 1.0).abs() < 1e-6);

    let out = run(&["minimize", "--starts", "4", "--grid-points", "11"]);
    assert!(out.status.success());
    assert!((json(&out)["value"].as_f64().unwrap() - 10.0 / 3.0).abs() < 1e-7);
}

#[test]
fn reproduce_paper_summary() {
    let out = run(&["reproduce-paper", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let close = |k: &str, want: f64, tol: f64| {
        let got = v[k].as_f64().unwrap();
        assert!((got - want).abs() < tol, "{k}: {got} vs {want}");
    };
    close("min_trace_norm", 10.0 / 3.0, 1e-7);
    close("sim_cost", 5.0 / 3.0, 1e-9);
    close("diamond_to_cloner", 2.0 / 3.0, 1e-6);
    close("baseline_cost", 2.0, 1e-9);
    close("baseline_diamond", 1.0, 1e-6);
    close("sample_ratio", 25.0 / 18.0, 1e-12);
    assert_eq!(v["all_pass"], true);
}
