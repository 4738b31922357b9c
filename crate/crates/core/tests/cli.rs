use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mdimlab::runner::{emit_report, ReportFormat};
use mdimlab::theorems::VerificationReport;
use serde_json::json;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mdimlab"));
    c.env_remove("MDIMLAB_OUT_DIR");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn smoke_config_passes_with_exit_0() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["run"])
        .arg(configs().join("prop31_smoke.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("10 instances, 10 passed, 0 failed"), "{stdout}");
    let csv = fs::read_to_string(dir.path().join("verify_prop31.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn validate_reports_config_errors_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let good = bin().arg("validate").arg(configs().join("sandwich.json")).output().unwrap();
    assert_eq!(code(&good), 0);

    let empty = write(
        dir.path(),
        "empty.json",
        r#"{"experiment": "verify_prop32", "seed": 1, "instances": 3, "grids": {"lambda": []}}"#,
    );
    let o = bin().arg("validate").arg(&empty).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("grids.lambda"));

    let o = bin().arg("run").arg(&empty).output().unwrap();
    assert_eq!(code(&o), 2);

    let garbled = write(dir.path(), "garbled.json", "{ not json");
    assert_eq!(code(&bin().arg("validate").arg(&garbled).output().unwrap()), 2);
}

#[test]
fn guard_overflow_exits_3_naming_the_instance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "tight.json",
        r#"{"experiment": "verify_prop31", "seed": 5, "instances": 6, "limits": {"max_candidates": 1}}"#,
    );
    let o = bin().arg("run").arg(&cfg).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("instance 5-"));
}

#[test]
fn out_dir_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-env");
    let o = bin()
        .arg("run")
        .arg(configs().join("sofic_check.json"))
        .env("MDIMLAB_OUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(target.join("sofic_check.csv").exists());

    let flag = dir.path().join("from-flag");
    bin()
        .arg("run")
        .arg(configs().join("sofic_check.json"))
        .arg("--out")
        .arg(&flag)
        .env("MDIMLAB_OUT_DIR", &target)
        .output()
        .unwrap();
    assert!(flag.join("sofic_check.csv").exists());
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, sub: &str| {
        let out = dir.path().join(sub);
        let o = bin()
            .arg("run")
            .arg(configs().join("sandwich.json"))
            .args(["--seed", seed, "--jobs", "2", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        fs::read_to_string(out.join("sandwich.json")).unwrap()
    };
    assert_eq!(run("3", "a"), run("3", "b"));
    assert_ne!(run("3", "a"), run("4", "c"));
}

#[test]
fn list_experiments_names_every_kind() {
    let o = bin().arg("list-experiments").output().unwrap();
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for k in ["verify_prop31", "sandwich", "orbit_identity", "probe_conjecture"] {
        assert!(text.contains(k));
    }
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn large_report_is_sorted_by_instance() {
    let reports: Vec<VerificationReport> = (0..1000)
        .rev()
        .map(|i| {
            let mut r = VerificationReport::informational(format!("inst-{i:04}"), json!({}));
            r.add_check("c", i as f64, 1000.0);
            r
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    emit_report(&reports, ReportFormat::Csv, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let ids: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids.len(), 1000);
    assert!(ids.windows(2).all(|w| w[0] < w[1]));
}
