use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qconstrain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qconstrain")).args(args).output().unwrap()
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

#[test]
fn invalid_scenario_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "schema_version = 1\nname = \"x\"\n[geometry]\nfamily = \"circle\"\nrho = -1.0\n[transverse]\nshape = \"disk\"\nradius = 1.0\n").unwrap();
    let out = qconstrain(&["spectrum", "--scenario", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("geometry.rho"), "{err}");

    std::fs::write(&bad, "name = ").unwrap();
    assert_eq!(qconstrain(&["curve", "--scenario", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn missing_scenario_file_is_an_error() {
    let out = qconstrain(&["curve", "--scenario", "/nonexistent/scenario.toml"]);
    assert!(!out.status.success());
}

#[test]
fn spectrum_writes_the_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = qconstrain(&[
        "spectrum",
        "--scenario",
        scenario("circle.toml").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--seed",
        "5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["curve.csv", "modes.csv", "effective_field.csv", "spectrum.csv", "metadata.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("wrote"));
}

#[test]
fn check_reports_every_item() {
    let dir = tempfile::tempdir().unwrap();
    let out = qconstrain(&["check", "--out", dir.path().to_str().unwrap(), "--grid-n", "48", "--vielbein-n", "256"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let csv = std::fs::read_to_string(dir.path().join("check.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), stdout.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count());
    let all_passed = rows.iter().all(|r| r.ends_with(",true"));
    assert_eq!(out.status.code(), Some(if all_passed { 0 } else { 1 }));
    assert!(rows.iter().any(|r| r.starts_with("gauss_equation/sphere,") && r.ends_with(",true")));
}
