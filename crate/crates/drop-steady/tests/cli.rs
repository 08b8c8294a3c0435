//! End-to-end behaviour of the `drop-steady` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin(args: &[&str], threads: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_drop-steady"));
    c.args(args).env_remove("DROP_STEADY_THREADS");
    if let Some(t) = threads {
        c.env("DROP_STEADY_THREADS", t);
    }
    c.output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn rest_state_run_writes_zero_fields() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "[physics]\nrho_tilde = 0.0\n[solver]\nlmax = 6\n");
    let out = t.path().join("o");
    let o = bin(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["history"].as_array().unwrap().len(), 0);
    assert_eq!(m["lambda"].as_f64(), Some(0.0));
    let eta = fs::read_to_string(out.join("eta.csv")).unwrap();
    for line in eta.lines().skip(1) {
        assert_eq!(line.split(',').nth(1).unwrap().parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn manifest_rerun_reproduces_artifacts_and_threads_are_honoured() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "[physics]\nrho_tilde = 1e-3\n[solver]\nlmax = 6\n[output]\ncoefficients = true\n");
    let a = t.path().join("a");
    let o = bin(&["solve", "--config", &cfg, "--out", a.to_str().unwrap()], Some("2"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&a);
    assert_eq!(m["threads"].as_u64(), Some(2));
    assert!(!m["history"].as_array().unwrap().is_empty());
    assert!(m["files"].as_array().unwrap().iter().any(|f| f == "coefficients.csv"));
    let b = t.path().join("b");
    let mpath = a.join("manifest.json");
    let o = bin(&["solve", "--threads", "2", "--config", mpath.to_str().unwrap(), "--out", b.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    for f in ["eta.csv", "profiles.csv", "coefficients.csv", "diagnostics.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn malformed_config_exits_with_config_error() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "[physics]\nrho_tilde = 1e-3\nviscosity = 2\n");
    let out = t.path().join("o");
    let o = bin(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let err = fs::read_to_string(out.join("error.json")).unwrap();
    assert!(err.contains("line 3") && err.contains("viscosity"), "{err}");
    let cfg = write_config(t.path(), "[solver]\nalpha = 0.5\n");
    assert_eq!(bin(&["solve", "--config", &cfg], None).status.code(), Some(2));
}

#[test]
fn validate_filters_and_detects_injected_fault() {
    let o = bin(&["validate", "--only", "curvature"], None);
    assert_eq!(o.status.code(), Some(0));
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.lines().skip(1).all(|l| l.starts_with("curvature")));
    assert_eq!(bin(&["validate", "--only", "nonsense"], None).status.code(), Some(2));

    let o = bin(&["validate", "--inject-hr-fault", "1.05"], None);
    assert_eq!(o.status.code(), Some(4));
    let table = String::from_utf8(o.stdout).unwrap();
    for line in table.lines().skip(1) {
        let failed = line.contains("FAIL");
        assert_eq!(failed, line.starts_with("hadamard-rybczynski"), "{line}");
    }
}

#[test]
fn sweep_records_failures_and_linear_speed() {
    let t = TempDir::new().unwrap();
    let cfg = write_config(t.path(), "[solver]\nlmax = 6\n[sweep]\nrho_tilde = [1e-3, 5e-4, 0.3]\n");
    let out = t.path().join("s");
    let o = bin(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    let mut rd = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    let lam = |i: usize| rows[i][1].parse::<f64>().unwrap();
    assert!(((lam(0) / lam(1)) / 2.0 - 1.0).abs() < 0.05);
    assert_eq!(&rows[0][6], "ok");
    assert!(rows[2][6].starts_with("failed"));

    let empty = t.path().join("e");
    let cfg = write_config(t.path(), "[sweep]\nrho_tilde = []\n");
    let o = bin(&["sweep", "--config", &cfg, "--out", empty.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(empty.join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
}
