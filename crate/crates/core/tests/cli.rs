mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::config_path;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grushin-lab"))
        .arg("--quiet")
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, edit: impl FnOnce(&mut serde_json::Value)) -> String {
    let text = std::fs::read_to_string(config_path("blowup_cubic.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["cells"] = serde_json::json!([16, 16]);
    v["sim"]["t_end"] = serde_json::json!(0.02);
    edit(&mut v);
    let path = dir.join("config.json");
    std::fs::write(&path, v.to_string()).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn eig_prints_eigenvalue_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |_| {});
    let out_dir = dir.path().join("eig");
    let out = lab(&["eig", &cfg, "--out", out_dir.to_str().unwrap(), "--dump-matrix"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout_json(&out)["lambda1"].as_f64().unwrap() > 0.0);
    for f in ["eig.json", "phi1.txt", "matrix.txt"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
}

#[test]
fn verify_writes_report_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |_| {});
    let out_dir = dir.path().join("run");
    let out = lab(&["verify", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["status"], "ok");
    assert!(report["verdict"].is_string());
    for f in ["report.json", "records.csv", "energy.svg", "functional.svg", "supnorm.svg"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let saved: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(saved, report);
}

#[test]
fn simulate_and_check_hypothesis_give_no_verdict_or_no_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |_| {});
    let sim = stdout_json(&lab(&["simulate", &cfg]));
    assert_eq!(sim["mode"], "free");
    assert_eq!(sim["verdict"], "not-applicable");
    let check = stdout_json(&lab(&["check-hypothesis", &cfg]));
    assert_eq!(check["simulation"], "not-applicable");
    assert_eq!(check["hypothesis"]["holds"], true);
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |v| v["space"]["gamma"] = serde_json::json!(-0.5));
    let out = lab(&["verify", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/space/gamma"));

    let cfg = write_config(dir.path(), |v| v["sim"]["dt_inti"] = serde_json::json!(0.1));
    let out = lab(&["verify", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt_inti"));

    let missing = dir.path().join("missing.json");
    assert_eq!(lab(&["eig", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(lab(&["sweep", &cfg, "--axis", "delta", "--values", "1"]).status.code(), Some(2));
    assert_eq!(lab(&["sweep", &cfg, "--axis", "beta", "--values", "1,x"]).status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let u0 = dir.path().join("u0.txt");
    std::fs::write(&u0, "-1\n".repeat(15 * 15)).unwrap();
    let cfg = write_config(dir.path(), |v| v["initial"] = serde_json::json!({"file": {"path": u0}}));
    let out = lab(&["verify", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    let report = stdout_json(&out);
    assert_eq!(report["status"], "failed");
    assert_eq!(report["failed_stage"], "initial");
}

#[test]
fn sweep_writes_csv_in_input_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |_| {});
    let out_dir = dir.path().join("sweep");
    let out = lab(&["sweep", &cfg, "--axis", "beta", "--values", "0.1,0.05,0.01", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let values: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values, [0.1, 0.05, 0.01]);

    let empty_dir = dir.path().join("empty");
    let out = lab(&["sweep", &cfg, "--axis", "beta", "--values", "", "--out", empty_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(empty_dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().collect::<Vec<_>>(), [grushin_core::runner::SWEEP_CSV_HEADER]);
}
