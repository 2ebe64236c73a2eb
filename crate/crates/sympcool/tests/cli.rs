//! End-to-end checks of the command-line binary: artifact layout,
//! manifest completeness, byte-level determinism, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn sympcool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sympcool"))
        .args(args)
        .output()
        .expect("binary should launch")
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

#[test]
fn modes_writes_csv_and_a_complete_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = sympcool(&["modes", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("axial pair"), "summary line missing:\n{stdout}");

    let csv = String::from_utf8(read(dir.path(), "modes.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap().split(',').next().unwrap(),
        "mode",
        "first row must be the header"
    );
    assert_eq!(lines.count(), 6, "two ions in 3D give six modes");

    let manifest: serde_json::Value =
        serde_json::from_slice(&read(dir.path(), "manifest.json")).unwrap();
    let files: Vec<&str> =
        manifest["files"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(files.contains(&"modes.csv"), "manifest must list modes.csv: {files:?}");
    assert!(manifest["config_sha256"].as_str().unwrap().len() == 64);

    // nothing in the directory that the manifest does not own up to
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        assert!(
            name == "manifest.json" || files.contains(&name.as_str()),
            "unlisted file {name}"
        );
    }
}

#[test]
fn identical_configs_produce_byte_identical_output() {
    let cfg = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(cfg.path(), r#"{"micromotion": {"ratio": 0.1, "grid_points": 61}}"#).unwrap();
    let cfg_path = cfg.path().to_str().unwrap();

    let mut outputs = Vec::new();
    for jobs in ["1", "1", "2"] {
        let dir = tempfile::tempdir().unwrap();
        let out = sympcool(&[
            "micromotion",
            "--config",
            cfg_path,
            "--out",
            dir.path().to_str().unwrap(),
            "--jobs",
            jobs,
        ]);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        outputs.push(read(dir.path(), "micromotion_sweep.csv"));
    }
    assert_eq!(outputs[0], outputs[1], "reruns must be byte-identical");
    assert_eq!(outputs[0], outputs[2], "worker count must not change the bytes");
}

#[test]
fn configuration_errors_exit_with_code_2_and_name_the_field() {
    let cfg = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(cfg.path(), r#"{"trap": {"w_zero": 1.0}}"#).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = sympcool(&[
        "modes",
        "--config",
        cfg.path().to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("w_zero"), "diagnostic must name the unknown key: {stderr}");
    assert!(!dir.path().join("manifest.json").exists(), "failed run must not emit a manifest");
}

#[test]
fn dual_key_collisions_are_rejected() {
    let cfg = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(
        cfg.path(),
        r#"{"scheme": {"detuning": 4.7e9, "detuning_over_2pi_hz": 7.5e8}}"#,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = sympcool(&[
        "estimate",
        "--config",
        cfg.path().to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    // estimate never touches the scheme section, so this must pass; cool does
    assert!(out.status.success());

    let dir2 = tempfile::tempdir().unwrap();
    let out2 = sympcool(&[
        "cool",
        "--config",
        cfg.path().to_str().unwrap(),
        "--out",
        dir2.path().to_str().unwrap(),
    ]);
    assert_eq!(out2.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out2.stderr);
    assert!(stderr.contains("detuning"), "diagnostic must name the colliding field: {stderr}");
}

#[test]
fn estimate_reports_the_shallow_mode_pi_time() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        sympcool(&["estimate", "--eta", "0.082", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let report = String::from_utf8(read(dir.path(), "estimate.txt")).unwrap();
    let tau_line = report
        .lines()
        .find(|l| l.starts_with("tau_pi_s"))
        .expect("report must carry tau_pi_s");
    let tau: f64 = tau_line.split('=').nth(1).unwrap().trim().parse().unwrap();
    assert!((tau - 1.0162601626016259e-5).abs() < 1e-12, "tau_pi = {tau}");
    assert!(report.contains("identity P_SE = R_SE*tau_pi: exact"));
}

#[test]
fn stray_field_fit_inverts_a_synthetic_observation() {
    let dir = tempfile::tempdir().unwrap();
    let out = sympcool(&[
        "micromotion",
        "--fit",
        "shift=-60000",
        "eta1=0.03",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = String::from_utf8(read(dir.path(), "fit.txt")).unwrap();
    assert!(report.contains("recovered"), "fit report:\n{report}");
    let residual: f64 = report
        .lines()
        .find(|l| l.contains("residual"))
        .unwrap()
        .split('=')
        .nth(1)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(residual < 1e-3, "fit should reproduce the observables, residual {residual}");
}

#[test]
fn malformed_fit_arguments_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = sympcool(&[
        "micromotion",
        "--fit",
        "shift=abc",
        "eta1=0.03",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("shift"));
}
