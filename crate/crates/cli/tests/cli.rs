//! End-to-end runner checks: exit codes, determinism of data files, manifest
//! hashing, and the make-base profiles.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_randwave"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn make_power_base(dir: &Path, name: &str, sigma: f64, n_max: u32) -> std::path::PathBuf {
    let out = dir.join(name);
    let status = bin()
        .args([
            "make-base",
            "--profile",
            "power-decay",
            "--sigma",
            &sigma.to_string(),
            "--n-max",
            &n_max.to_string(),
            "--s",
            "0.5",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    out
}

#[test]
fn make_base_single_mode_prints_the_norm() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("single.json");
    let output = bin()
        .args(["make-base", "--profile", "single-mode", "--mode", "1,0,0", "--s", "0", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    // sqrt(1/2) = 0.7071...
    assert!(stdout.contains("7.0710678118654"), "stdout: {stdout}");
    assert!(out.exists());
}

#[test]
fn tails_run_is_reproducible_and_hashed() {
    let dir = tempfile::tempdir().unwrap();
    let base = make_power_base(dir.path(), "base.json", 2.0, 3);
    let config = dir.path().join("tails.json");
    write(
        &config,
        &format!(
            r#"{{
  "experiment": "tails",
  "base_spectrum": "{}",
  "law": "gaussian",
  "s": 0.5,
  "functional": "sobolev_pair",
  "lambdas": [0.5, 1.0, 2.0, 3.0, 4.0, 6.0],
  "trials": 400,
  "master_seed": 11
}}"#,
            base.display()
        ),
    );
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    for out in [&out1, &out2] {
        let status = bin()
            .args(["tails", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(out1.join("tail_curve.csv")).unwrap();
    let b = std::fs::read(out2.join("tail_curve.csv")).unwrap();
    assert_eq!(a, b, "data files must be byte-identical across reruns");

    // the manifest lists every data file with its content hash
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out1.join("run_manifest.json")).unwrap())
            .unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(outputs.iter().any(|o| o["path"] == "tail_curve.csv"));
    assert!(outputs.iter().any(|o| o["path"] == "tail_fit.json"));
    for entry in outputs {
        let bytes = std::fs::read(out1.join(entry["path"].as_str().unwrap())).unwrap();
        use sha2::Digest;
        let digest = sha2::Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(entry["sha256"].as_str().unwrap(), hex);
    }
}

#[test]
fn zero_trials_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let base = make_power_base(dir.path(), "base.json", 2.0, 2);
    let config = dir.path().join("tails.json");
    write(
        &config,
        &format!(
            r#"{{"base_spectrum": "{}", "law": "gaussian", "lambdas": [1.0], "trials": 400, "master_seed": 1}}"#,
            base.display()
        ),
    );
    let status = bin()
        .args(["tails", "--config"])
        .arg(&config)
        .args(["--set", "trials=0", "--out"])
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    write(&config, r#"{"no_such_key": 1}"#);
    let status = bin()
        .args(["evolve", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn experiment_name_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let base = make_power_base(dir.path(), "base.json", 2.0, 2);
    let config = dir.path().join("cfg.json");
    write(
        &config,
        &format!(
            r#"{{"experiment": "tails", "base_spectrum": "{}", "t": 0.1, "dt": 0.01}}"#,
            base.display()
        ),
    );
    let status = bin()
        .args(["evolve", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn kakutani_identical_spectra_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let base = make_power_base(dir.path(), "base.json", 2.0, 3);
    let config = dir.path().join("kaku.json");
    write(
        &config,
        &format!(
            r#"{{"base_spectrum": "{b}", "other_spectrum": "{b}"}}"#,
            b = base.display()
        ),
    );
    let out = dir.path().join("out");
    let status = bin()
        .args(["kakutani", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("affinity_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["verdict"], "Equivalent");
}

#[test]
fn instability_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    // large amplitude and a huge step blow past the kick stability range
    let base = make_power_base(dir.path(), "base.json", 2.0, 3);
    let config = dir.path().join("evolve.json");
    write(
        &config,
        &format!(
            r#"{{"base_spectrum": "{}", "s": 0.5, "t": 60.0, "dt": 0.6, "record_every": 1, "n_split": "full", "law": "gaussian", "master_seed": 3}}"#,
            base.display()
        ),
    );
    let output = bin()
        .args(["evolve", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(
        output.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}
