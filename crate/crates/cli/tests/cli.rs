use richards_front_cli::output::{decode_fields, sha256_hex};
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_richards-front")).args(args).env_remove("RICHARDS_FRONT_THREADS").output().unwrap()
}

fn header(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().map(String::from).collect()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn assert_manifest_hashes(dir: &Path, command: &str) {
    let m = manifest(dir);
    assert_eq!(m["tool"], "richards-front");
    assert_eq!(m["command"], command);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    let artifacts = m["artifacts"].as_array().unwrap();
    assert!(!artifacts.is_empty());
    for a in artifacts {
        let bytes = std::fs::read(dir.join(a["path"].as_str().unwrap())).unwrap();
        assert_eq!(a["bytes"].as_u64().unwrap(), bytes.len() as u64);
        assert_eq!(a["sha256"].as_str().unwrap(), sha256_hex(&bytes));
    }
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cli(&["analyze", "--preset", "p_const", "--config", "x.json"]).status.code(), Some(2));
    assert_eq!(cli(&["simulate", "--preset", "p_const", "--dimension", "3"]).status.code(), Some(2));
}

#[test]
fn unknown_preset_is_a_configuration_error() {
    let out = cli(&["analyze", "--preset", "p_cubic"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p_const"));
}

#[test]
fn malformed_config_reports_position() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"schema_version\": 1,\n  \"r0\": oops\n}\n").unwrap();
    let out = cli(&["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn bad_thread_count_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_richards-front"))
        .args(["analyze", "--preset", "p_const", "--out-dir", tmp.path().to_str().unwrap()])
        .env("RICHARDS_FRONT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_and_envelope_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let out = cli(&["analyze", "--preset", "p_sqrt", "--directions", "8", "--samples", "21", "--out-dir", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(header(&a.join("front_curves.csv")), ["omega", "t", "radius", "speed", "regime"]);
    let rows = csv::Reader::from_path(a.join("front_curves.csv")).unwrap().records().count();
    assert_eq!(rows, 8 * 21);
    assert_manifest_hashes(&a, "analyze");

    let e = tmp.path().join("e");
    let out = cli(&["envelope", "--preset", "p_invsqrt", "--t", "0.5,3", "--out-dir", e.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(header(&e.join("region_bounds.csv")), ["t", "bound", "shape", "index", "x_perp", "x_n"]);
    assert_manifest_hashes(&e, "envelope");
}

#[test]
fn analyze_output_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let d = tmp.path().join(sub);
        assert_eq!(cli(&["analyze", "--preset", "p_invsqrt", "--directions", "6", "--out-dir", d.to_str().unwrap()]).status.code(), Some(0));
        std::fs::read(d.join("front_curves.csv")).unwrap()
    };
    assert_eq!(run("x"), run("y"));
}

#[test]
fn scenario_files_drive_simulate() {
    let tmp = tempfile::tempdir().unwrap();
    let sc = tmp.path().join("sc");
    let out = cli(&["scenarios", "--out-dir", sc.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let listing = String::from_utf8_lossy(&out.stdout);
    for name in ["p_invsqrt", "p_const", "p_linear", "p_sqrt"] {
        assert!(listing.contains(name));
        assert!(sc.join(format!("{name}_quick_1d.json")).exists());
    }
    assert_manifest_hashes(&sc, "scenarios");

    let run = tmp.path().join("run");
    let cfg = sc.join("p_sqrt_quick_1d.json");
    let out = cli(&["simulate", "--config", cfg.to_str().unwrap(), "--t-max", "0.2", "--out-dir", run.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(header(&run.join("extents.csv")), ["t", "up", "down", "right", "left", "bound_up", "bound_down", "bound_lateral"]);
    assert_eq!(header(&run.join("diagnostics.csv"))[0], "t");
    let (dim, cells, half_width, fields) = decode_fields(&std::fs::read(run.join("fields.bin")).unwrap()).unwrap();
    assert_eq!((dim, cells), (1, 256));
    assert!(half_width > 0.0);
    assert!(fields.len() > 2);
    assert_eq!(fields[0].t, 0.0);
    assert!((fields.last().unwrap().t - 0.2).abs() < 1e-12);
    assert!(fields.iter().all(|f| f.v.len() == 256));
    assert_manifest_hashes(&run, "simulate");
}

#[test]
fn verify_passes_on_a_resolved_case() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("v");
    let out = cli(&["verify", "--preset", "p_sqrt", "--quick", "--dimension", "1", "--t-max", "1", "--out-dir", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let mut r = csv::Reader::from_path(d.join("checks.csv")).unwrap();
    let checks: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert!(checks.iter().any(|c| &c[0] == "containment"));
    assert!(checks.iter().all(|c| &c[1] == "true"));
    assert_manifest_hashes(&d, "verify");
}

#[test]
fn verify_failure_exits_one_and_keeps_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("v");
    let out = cli(&["verify", "--preset", "p_const", "--quick", "--dimension", "1", "--out-dir", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(d.join("verification.json").exists());
    assert!(d.join("manifest.json").exists());
}
