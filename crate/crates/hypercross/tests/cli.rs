//! Black-box tests of the `hypercross` binary: config validation, output
//! files, exit codes, and the JSON interchange format.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypercross"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("exp.toml");
    std::fs::write(&path, body).unwrap();
    path
}

const BASE: &str = r#"
schema_version = 1
seed = 3

[operator]
name = "kstar"
sigma = 2
d = 2

[function]
kind = "korobov"
a = 2.0
bandwidth = 4096

[sweep]
n_min = 2
n_max = 7
q = [2.0]

[norms]
r = 1.5
"#;

#[test]
fn rates_produces_csv_fit_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let out = dir.path().join("results");
    let status = bin()
        .args(["rates", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--jobs", "2"])
        .env_remove("HYPERCROSS_OUT")
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("rates.csv")).unwrap();
    assert!(csv.contains("label,op,d,n,q,error,dof,tail,wallclock_ms"));
    assert!(csv.lines().filter(|l| l.contains("korobov")).count() == 6);
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("rate_fit_q2.json")).unwrap())
            .unwrap();
    assert_eq!(fit["predicted_r"], 1.5);
    assert!(fit["fit"]["r"].as_f64().unwrap() > 0.5);
    assert!(out.join("rates.txt").exists());
    assert!(out.join("rates_plot.csv").exists());
}

#[test]
fn rates_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let mut csvs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}"));
        let status = bin()
            .args(["rates", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .env_remove("HYPERCROSS_OUT")
            .status()
            .unwrap();
        assert!(status.success());
        let csv = std::fs::read_to_string(out.join("rates.csv")).unwrap();
        // wallclock column varies between runs; strip it
        let stable: Vec<String> = csv
            .lines()
            .map(|l| l.rsplitn(2, ',').nth(1).unwrap_or(l).to_string())
            .collect();
        csvs.push(stable);
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn invalid_config_is_rejected_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &BASE.replace("r = 1.5", "theta = 0.5"));
    let output = bin()
        .args(["conditions", "--config"])
        .arg(&cfg)
        .env_remove("HYPERCROSS_OUT")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("norms.theta"), "stderr: {err}");
}

#[test]
fn env_var_overrides_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let env_out = dir.path().join("from_env");
    let flag_out = dir.path().join("from_flag");
    let status = bin()
        .args(["grid-info", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&flag_out)
        .env("HYPERCROSS_OUT", &env_out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(env_out.join("grid_info.txt").exists());
    assert!(!flag_out.exists());
}

#[test]
fn conditions_command_reports_pattern_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
schema_version = 1
[operator]
kernel = "modified_dirichlet"
averager = "char"
sigma = 2
d = 1
[conditions]
s_values = [2.0]
"#;
    let cfg = write_config(dir.path(), body);
    let out = dir.path().join("cond");
    let output = bin()
        .args(["conditions", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env_remove("HYPERCROSS_OUT")
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("xi = 1"));
    let table: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("conditions.json")).unwrap())
            .unwrap();
    assert!(table.as_array().unwrap().len() >= 5);
}

#[test]
fn sharpness_exit_reflects_exact_match() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
schema_version = 1
[operator]
kernel = "dirichlet"
averager = "char"
sigma = 2
d = 2
[sweep]
n_min = 3
n_max = 8
"#;
    let cfg = write_config(dir.path(), body);
    let out = dir.path().join("sharp");
    let status = bin()
        .args(["sharpness", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env_remove("HYPERCROSS_OUT")
        .status()
        .unwrap();
    assert!(status.success());
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("sharpness.json")).unwrap())
            .unwrap();
    assert!(rows
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["match"].as_bool().unwrap()));
}

#[test]
fn trig_poly_json_round_trip() {
    use hypercross::fourier::TrigPoly;
    use num_complex::Complex64;
    let mut p = TrigPoly::new(2);
    p.set_coeff(&[3, -1], Complex64::new(0.25, -1.5));
    p.set_coeff(&[0, 0], Complex64::new(1.0, 0.0));
    let v = p.to_json();
    let text = serde_json::to_string(&v).unwrap();
    let back = TrigPoly::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back.num_terms(), 2);
    assert_eq!(back.coeff(&[3, -1]), Complex64::new(0.25, -1.5));
}
