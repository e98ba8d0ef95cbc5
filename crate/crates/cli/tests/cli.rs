use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], config: &Path, out: &Path) -> (Output, Option<PathBuf>) {
    let output = Command::new(env!("CARGO_BIN_EXE_vortex-birth"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    let stdout = String::from_utf8_lossy(&output.stdout);
    let dir = stdout.lines().last().map(PathBuf::from).filter(|p| p.is_dir());
    (output, dir)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_manifest_complete(dir: &Path) {
    let manifest = json(&dir.join("manifest.json"));
    for f in manifest["files"].as_array().unwrap() {
        assert!(dir.join(f.as_str().unwrap()).is_file(), "missing {f}");
    }
}

#[test]
fn predict_canonical_is_certified() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, dir) = run(&["predict"], &configs().join("canonical_k100.toml"), tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let dir = dir.unwrap();
    assert_manifest_complete(&dir);
    let report = json(&dir.join("report.json"));
    assert_eq!(report["verdict"], "separation_certified");
    assert!((report["t0"].as_f64().unwrap() - 1.0 / 98.0).abs() < 1e-6);
    let sweep = fs::read_to_string(dir.join("zero_count.csv")).unwrap();
    assert!(sweep.starts_with("t,count\n"));
}

#[test]
fn predict_reports_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("canonical_k100.toml");
    let (_, a) = run(&["predict", "--json-only"], &cfg, tmp.path());
    let (_, b) = run(&["predict", "--json-only"], &cfg, tmp.path());
    let (a, b) = (a.unwrap(), b.unwrap());
    assert_ne!(a, b);
    assert_eq!(fs::read(a.join("report.json")).unwrap(), fs::read(b.join("report.json")).unwrap());
}

#[test]
fn predict_divergent_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, dir) = run(&["predict"], &configs().join("divergent.toml"), tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&dir.unwrap().join("report.json"))["verdict"], "separation_rejected");
}

#[test]
fn missing_constants_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("canonical_k100.toml")).unwrap();
    let fields_only = &text[text.find("[fields]").unwrap()..];
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, fields_only).unwrap();
    let (out, dir) = run(&["predict"], &cfg, tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[constants]"));
    assert!(dir.is_none());
}

#[test]
fn simulate_zero_end_time_writes_one_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, dir) = run(
        &["simulate", "--grid", "20", "--end-time", "0"],
        &configs().join("canonical_k100.toml"),
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let dir = dir.unwrap();
    assert_manifest_complete(&dir);
    let snaps: Vec<_> = fs::read_dir(dir.join("snapshots")).unwrap().collect();
    assert_eq!(snaps.len(), 1);
    let index = json(&dir.join("snapshots.json"));
    assert_eq!(index["snapshots"].as_array().unwrap().len(), 1);
    assert_eq!(index["boundary_condition"], "dirichlet_first_order");
    let csv = fs::read_to_string(dir.join("snapshots/snapshot_00000.csv")).unwrap();
    assert!(csv.starts_with("t,x1,x2,u1,u2,T\n"));
    assert_eq!(csv.lines().count(), 1 + 20 * 20);
}

#[test]
fn simulate_rejects_tiny_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, _) = run(&["simulate", "--grid", "4"], &configs().join("canonical_k100.toml"), tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_canonical_timeline_shows_transition() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, dir) = run(&["simulate", "--grid", "64"], &configs().join("canonical_k20.toml"), tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let timeline = fs::read_to_string(dir.unwrap().join("stagnation_timeline.csv")).unwrap();
    let counts: Vec<usize> = timeline.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(counts[0], 0);
    assert!(counts.contains(&2));
}

#[test]
fn verify_canonical_k20_is_concordant() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, dir) = run(&["verify", "--json-only"], &configs().join("canonical_k20.toml"), tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.unwrap().join("verify.json"));
    assert!(v["relative_gap"].as_f64().unwrap() <= 0.25);
    assert_eq!(v["concordant"], true);
}

#[test]
fn verify_uniform_stream_has_no_event() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, dir) = run(&["verify", "--json-only", "--grid", "32"], &configs().join("uniform.toml"), tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&dir.unwrap().join("verify.json"));
    assert_eq!(v["summary"], "no event on either side");
}

#[test]
fn verify_blow_up_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, dir) = run(
        &["verify", "--json-only", "--grid", "24", "--end-time", "1"],
        &configs().join("canonical_k100.toml"),
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let dir = dir.unwrap();
    assert_manifest_complete(&dir);
    let index = json(&dir.join("snapshots.json"));
    assert!(index["failure"].as_str().unwrap().contains("non-finite"));
    assert!(!index["snapshots"].as_array().unwrap().is_empty());
}
