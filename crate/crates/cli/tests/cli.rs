use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sobolev(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sobolev"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gap_on_torus_regular_is_r_squared() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"group":{"model":"torus","points":64},
            "representation":{"kind":"torus_regular","N":16},
            "experiment":{"R":1.0}}"#,
    );
    let out = dir.path().join("out");
    let res = sobolev(&["gap", "--config", &cfg, "--out", out.to_str().unwrap(), "--format", "both"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let json = read_json(&out.join("gap.json"));
    assert_eq!(json["gap"]["sigma_min"].as_f64(), Some(1.0));
    assert_eq!(json["gap"]["invertible"], Value::Bool(true));
    let csv = fs::read_to_string(out.join("gap.csv")).unwrap();
    assert!(csv.starts_with("R,R_E,c_pi,c_g,sigma_min,invertible,above_threshold\n"));
    assert!(csv.contains("1.0000000000000000e0"));
}

#[test]
fn jacobi_violation_names_the_triple() {
    let dir = tempfile::tempdir().unwrap();
    // [X1,X2] = X3 and [X1,X3] = X1 break the Jacobi identity
    let mut c = vec![vec![vec![0.0; 3]; 3]; 3];
    c[0][1][2] = 1.0;
    c[1][0][2] = -1.0;
    c[0][2][0] = 1.0;
    c[2][0][0] = -1.0;
    let cfg = serde_json::json!({
        "group": {"model": "su2", "l_max": 1, "algebra": {"dim": 3, "structure_constants": c}},
        "representation": {"kind": "su2_irrep", "l": 1}
    });
    let cfg = write_config(dir.path(), &cfg.to_string());
    let res = sobolev(&["gap", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(!res.status.success());
    let err: Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "jacobi");
    assert_eq!(err["error"]["triple"].as_array().unwrap().len(), 3);
    assert!(!dir.path().join("gap.json").exists());
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"group":{"model":"torus","points":64},
            "representation":{"kind":"torus_regular","N":4},
            "experiment":{"k":2,"s":1.5,"ensemble_size":3}}"#,
    );
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let res = sobolev(&["norms", "--config", &cfg, "--out", out.to_str().unwrap(), "--format", "both", "--seed", "9"]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        outputs.push((fs::read(out.join("norms.json")).unwrap(), fs::read(out.join("norms.csv")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let other = dir.path().join("c");
    sobolev(&["norms", "--config", &cfg, "--out", other.to_str().unwrap(), "--seed", "10"]);
    assert_ne!(fs::read(other.join("norms.json")).unwrap(), outputs[0].0);
}

#[test]
fn kernel_and_factorize() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"group":{"model":"euclidean","half_width":48.0,"points":65536},
            "representation":{"kind":"euclidean_matrix","matrices":[[[0.5]]]},
            "experiment":{"R":1.0,"m":1,"ensemble_size":0},
            "output":{"format":"both"}}"#,
    );
    let out = dir.path().join("out");
    let res = sobolev(&["factorize", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let json = read_json(&out.join("factorize.json"));
    assert!(json["max_residual"].as_f64().unwrap() < 1e-6);

    let res = sobolev(&["kernel", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let json = read_json(&out.join("kernel.json"));
    let rate = json["kernel"]["split"]["tail_decay_rate"].as_f64().unwrap();
    assert!((rate - 1.0).abs() < 0.05);
    let csv = fs::read_to_string(out.join("kernel.csv")).unwrap();
    let first = csv.lines().nth(1).unwrap();
    let value: f64 = first.split(',').nth(1).unwrap().parse().unwrap();
    assert!((value - 0.5).abs() < 1e-12);
}

#[test]
fn below_threshold_is_a_machine_readable_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"group":{"model":"euclidean","half_width":8.0,"points":64},
            "representation":{"kind":"euclidean_matrix","matrices":[[[1.0]]]},
            "experiment":{"R":0.5}}"#,
    );
    let res = sobolev(&["factorize", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "below_threshold");
    assert!((err["error"]["R_E"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn compare_sweeps_truncations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"group":{"model":"torus","points":64},
            "representation":{"kind":"torus_regular","N":8},
            "experiment":{"k":1,"s":1.0,"ensemble_size":8,"truncations":[4,8]}}"#,
    );
    let out = dir.path().join("out");
    let res = sobolev(&["compare", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let reports = read_json(&out.join("compare.json"))["reports"].as_array().unwrap().clone();
    assert_eq!(reports.len(), 6);
    for r in &reports {
        let (lo, hi) = (r["lower"].as_f64().unwrap(), r["upper"].as_f64().unwrap());
        assert!(lo > 0.0 && hi.is_finite());
    }
}

#[test]
fn missing_config_and_bad_values() {
    let dir = tempfile::tempdir().unwrap();
    let res = sobolev(&["gap"]);
    assert!(!res.status.success());
    let err: Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "missing_config");

    let cfg = write_config(
        dir.path(),
        r#"{"group":{"model":"torus","points":64},"experiment":{"R":1.0,"m":0}}"#,
    );
    let res = sobolev(&["kernel", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    let err: Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(err["error"]["field"], "m");
}

#[test]
fn report_all_runs_every_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let res = sobolev(&["report-all", "--out", dir.path().to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stdout));
    let json = read_json(&dir.path().join("report-all.json"));
    assert_eq!(json["criteria"].as_array().unwrap().len(), 10);
    assert_eq!(json["passed"], Value::Bool(true));
}
