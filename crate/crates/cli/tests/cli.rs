use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn sqzcav(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqzcav"))
        .args(args)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn record(dir: &Path, command: &str) -> Value {
    let text = std::fs::read_to_string(dir.join("out").join(format!("{command}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn csv(dir: &Path, name: &str) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(dir.join("out").join(name)).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn validate_reports_regime_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let ok = sqzcav(dir.path(), &["validate"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("adiabatic_r"));
    assert_eq!(record(dir.path(), "validate")["result"]["regime"]["pass"], Value::Bool(true));

    let cfg = write_config(dir.path(), "strong.json", r#"{"schema": "sqzcav-config/1", "system": {"omega_r": 4800.0}}"#);
    let bad = sqzcav(dir.path(), &["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&bad), 1);
    let rec = record(dir.path(), "validate");
    let rows = rec["result"]["regime"]["rows"].as_array().unwrap();
    let adiabatic = rows.iter().find(|r| r["name"] == "adiabatic_r").unwrap();
    assert_eq!(adiabatic["pass"], Value::Bool(false));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let unknown = write_config(dir.path(), "unknown.json", r#"{"schema": "sqzcav-config/1", "probe": {"points": 5, "pionts": 3}}"#);
    let out = sqzcav(dir.path(), &["validate", "--config", unknown.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("probe.pionts") && err.contains("line 1"), "{err}");

    let malformed = write_config(dir.path(), "malformed.json", "{\"schema\": \"sqzcav-config/1\",\n  \"system\": {\"g\": }");
    assert_eq!(code(&sqzcav(dir.path(), &["validate", "--config", malformed.to_str().unwrap()])), 2);

    let negative = write_config(dir.path(), "negative.json", r#"{"schema": "sqzcav-config/1", "system": {"kappa": -1.0}}"#);
    assert_eq!(code(&sqzcav(dir.path(), &["bloch", "--config", negative.to_str().unwrap()])), 2);

    assert_eq!(code(&sqzcav(dir.path(), &["bloch", "--tier", "T9"])), 2);
    assert_eq!(code(&sqzcav(dir.path(), &["spectrum", "--method", "guess"])), 2);
    assert_eq!(code(&sqzcav(dir.path(), &["teleport"])), 2);
}

#[test]
fn two_level_bloch_rates_match_closed_form() {
    let dir = TempDir::new().unwrap();
    let out = sqzcav(dir.path(), &["bloch", "--tier", "T0"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rec = record(dir.path(), "bloch");
    for k in ["gamma_x", "gamma_y", "gamma_z"] {
        assert!(rec["result"]["relative_error"][k].as_f64().unwrap() < 0.01, "{k}");
    }
    let (header, rows) = csv(dir.path(), "bloch.csv");
    assert_eq!(header, "t_us,sx,sy,sz");
    assert_eq!(rows.len(), 400);
    let c = 1.0 / 3f64.sqrt();
    assert!(rows[0][0] == 0.0 && rows[0][1..].iter().all(|v| (v - c).abs() < 1e-12));
}

#[test]
fn unsqueezed_two_level_quadratures_decay_alike() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "vac.json", r#"{"schema": "sqzcav-config/1", "system": {"n": 0.0, "m_re": 0.0}}"#);
    assert_eq!(code(&sqzcav(dir.path(), &["bloch", "--tier", "T0", "--config", cfg.to_str().unwrap()])), 0);
    let fitted = &record(dir.path(), "bloch")["result"]["fitted"];
    let half = std::f64::consts::PI * 5.2;
    for k in ["gamma_x", "gamma_y"] {
        let g = fitted[k].as_f64().unwrap();
        assert!((g - half).abs() < 0.01 * half, "{k} = {g}");
    }
}

#[test]
fn reduced_bloch_run_reports_reference_rates() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&sqzcav(dir.path(), &["bloch"])), 0);
    let rec = record(dir.path(), "bloch");
    let gy = rec["result"]["analytic"]["gamma_y_over_2pi"].as_f64().unwrap();
    assert!((gy - 0.027164).abs() < 5e-7, "{gy}");
    assert!(rec["result"]["relative_error"]["gamma_y"].as_f64().unwrap() < 0.01);
    assert_eq!(rec["config"]["tier"], "T4R");
}

#[test]
fn analytic_spectrum_is_deterministic() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&sqzcav(dir.path(), &["spectrum", "--probe-mode", "sym"])), 0);
    let first = std::fs::read(dir.path().join("out/spectrum_analytic.csv")).unwrap();
    let id = record(dir.path(), "spectrum")["run_id"].clone();
    assert_eq!(code(&sqzcav(dir.path(), &["spectrum", "--probe-mode", "sym", "--threads", "1"])), 0);
    assert_eq!(std::fs::read(dir.path().join("out/spectrum_analytic.csv")).unwrap(), first);
    assert_eq!(record(dir.path(), "spectrum")["run_id"], id);

    let (header, rows) = csv(dir.path(), "spectrum_analytic.csv");
    assert_eq!(header, "nu_over_2pi_MHz,re_Ap_plus,im_Ap_plus,abs2_Ap_plus,re_Ap_minus,im_Ap_minus,abs2_Ap_minus");
    assert_eq!(rows.len(), 801);
    assert!((rows[0][0] + 3.0).abs() < 1e-15 && (rows[800][0] - 3.0).abs() < 1e-15);
    for r in &rows {
        assert!((r[3] - (r[1] * r[1] + r[2] * r[2])).abs() <= 1e-15 * r[3]);
    }
}

#[test]
fn uncorrelated_single_probe_has_no_lower_sideband() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "m0.json",
        r#"{"schema": "sqzcav-config/1", "system": {"m_re": 0.0}, "probe": {"mode": "single", "points": 101}}"#,
    );
    assert_eq!(code(&sqzcav(dir.path(), &["spectrum", "--config", cfg.to_str().unwrap()])), 0);
    let (_, rows) = csv(dir.path(), "spectrum_analytic.csv");
    assert!(rows.iter().all(|r| r[6] == 0.0 && r[3] > 0.0));
}

#[test]
fn numeric_route_writes_both_tables_and_discrepancy() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "vacuum.json",
        r#"{"schema": "sqzcav-config/1", "system": {"n": 0.0, "m_re": 0.0, "n_max": 3},
            "probe": {"mode": "single", "points": 9, "nu_max": 0.5}}"#,
    );
    let out = sqzcav(dir.path(), &["spectrum", "--config", cfg.to_str().unwrap(), "--method", "both"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (h, numeric) = csv(dir.path(), "spectrum_numeric.csv");
    let (_, analytic) = csv(dir.path(), "spectrum_analytic.csv");
    assert!(h.starts_with("nu_over_2pi_MHz,"));
    assert_eq!(numeric.len(), 9);
    for (n, a) in numeric.iter().zip(&analytic) {
        assert_eq!(n[0], a[0]);
        assert!(n[6] < 1e-20);
    }
    let (dh, diff) = csv(dir.path(), "spectrum_discrepancy.csv");
    assert_eq!(dh, "nu_over_2pi_MHz,rel_diff_abs2_Ap_plus,rel_diff_abs2_Ap_minus");
    assert_eq!(diff.len(), 9);
    for ((d, n), a) in diff.iter().zip(&numeric).zip(&analytic) {
        assert!((d[1] - (n[3] - a[3]).abs() / a[3]).abs() <= 1e-12 * d[1].max(1e-300));
    }
    assert!(record(dir.path(), "spectrum")["result"]["routes"]["numeric"]["sz_numeric"].is_f64());
}

#[test]
fn identical_tiers_have_zero_distance() {
    let dir = TempDir::new().unwrap();
    let out = sqzcav(dir.path(), &["compare", "--tier-a", "T4R", "--tier-b", "T4R"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv(dir.path(), "compare.csv");
    assert_eq!(header, "t_us,trace_distance");
    assert_eq!(rows.len(), 200);
    assert!(rows.iter().all(|r| r[1] == 0.0));
}

#[test]
fn nogo_rows_obey_the_ideal_squeezing_relations() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "nogo.json", r#"{"schema": "sqzcav-config/1", "nogo": {"points": 21}}"#);
    assert_eq!(code(&sqzcav(dir.path(), &["nogo", "--config", cfg.to_str().unwrap()])), 0);
    let (header, rows) = csv(dir.path(), "nogo.csv");
    assert_eq!(header, "N,M_fraction,P,quad_sum,ratio");
    assert_eq!(rows.len(), 21 * 21);
    for r in &rows {
        let (n, f) = (r[0], r[1]);
        let m = f * (n * (n + 1.0)).sqrt();
        let p = (n * (n + 1.0) + m * m) / (2.0 * n);
        let sum = 2.0 * n + 1.0 - 2.0 * m;
        assert!((r[2] - p).abs() <= 1e-12 * p);
        assert!((r[3] - (sum + p)).abs() <= 1e-12 * (sum + p));
        assert!((r[4] - p / sum).abs() <= 1e-10 * (p / sum));
        assert!(r[3] >= 1.0);
    }
    let rec = record(dir.path(), "nogo");
    assert_eq!(rec["result"]["bound_holds"], Value::Bool(true));
    let ratio = rec["result"]["configured"]["ratio"].as_f64().unwrap();
    assert!((ratio - 5.598).abs() < 5e-4, "{ratio}");
}

#[test]
fn resolved_snapshot_reproduces_the_run() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&sqzcav(dir.path(), &["validate", "--nmax", "9", "--seed", "7"])), 0);
    let rec = record(dir.path(), "validate");
    assert_eq!(rec["config"]["system"]["n_max"], 9);
    assert!(rec["config"]["system"]["omega_s"].is_f64());
    assert!(rec["config"]["bloch"]["t_final_us"].is_f64());
    assert_eq!(rec["result"]["seed"], 7);

    let snapshot = write_config(dir.path(), "snapshot.json", &serde_json::to_string(&rec["config"]).unwrap());
    assert_eq!(code(&sqzcav(dir.path(), &["validate", "--config", snapshot.to_str().unwrap()])), 0);
    let again = record(dir.path(), "validate");
    assert_eq!(again["config"], rec["config"]);
    assert_eq!(again["run_id"], rec["run_id"]);
}
