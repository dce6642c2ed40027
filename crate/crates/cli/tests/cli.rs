mod common;

use std::fs;

use common::*;
use csvt_cli::{cli_main, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};

fn s(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn couple_with_mesh_overrides_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = default_fixture(dir.path());
    let mesh = dir.path().join("square.msh");
    let out = dir.path().join("cli-out");
    let code = cli_main([
        "csvt-couple", "couple", "--config", s(&cfg), "--mesh", s(&mesh), "--region", "bnd",
        "--order", "2", "--output", s(&out),
    ]);
    assert_eq!(code, EXIT_OK);
    let names: Vec<String> = snapshot_dir(&out).into_iter().map(|f| f.0).collect();
    assert_eq!(names, vec!["acouPot.descrip", "acouPot.xml", "acouPot_0000.csv", "acouPot_0001.csv"]);
    // Four boundary segments with two points each.
    let body = fs::read_to_string(out.join("acouPot_0000.csv")).unwrap();
    assert_eq!(body.lines().count(), 1 + 8);
}

#[test]
fn validate_reports_broken_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = default_fixture(dir.path());
    let ok = run_bin(&["validate", "--config", s(&cfg)]);
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(ok.stderr.is_empty());

    fs::write(dir.path().join("csvt/step1.csv"), "1\n2\n3\n").unwrap();
    let bad = run_bin(&["validate", "--config", s(&cfg)]);
    assert_eq!(bad.status.code(), Some(EXIT_FAILURE));
    let stderr = String::from_utf8_lossy(&bad.stderr);
    assert!(stderr.contains("step1.csv") && stderr.contains("(3 vs 4)"), "{stderr}");

    // couple refuses to run on a broken dataset and writes nothing.
    let couple = run_bin(&["couple", "--config", s(&cfg)]);
    assert_eq!(couple.status.code(), Some(EXIT_FAILURE));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn usage_errors_exit_2() {
    let unknown = run_bin(&["couple", "--config", "x.xml", "--frobnicate"]);
    assert_eq!(unknown.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("Usage"));
    assert_eq!(cli_main(["csvt-couple"]), EXIT_USAGE);
    assert_eq!(cli_main(["csvt-couple", "couple"]), EXIT_USAGE);
    assert_eq!(cli_main(["csvt-couple", "couple", "--config", "c", "--k", "many"]), EXIT_USAGE);
    assert_eq!(cli_main(["csvt-couple", "couple", "--config", "c", "--time-mode", "cubic"]), EXIT_USAGE);
    assert_eq!(cli_main(["csvt-couple", "couple", "--config", "c", "--mesh", "m", "--targets-file", "t"]), EXIT_USAGE);
    assert_eq!(cli_main(["csvt-couple", "--help"]), EXIT_OK);
}

#[test]
fn region_override_needs_mesh_targets() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = default_fixture(dir.path());
    let pts = dir.path().join("t.csv");
    fs::write(&pts, "0.5,0.5\n").unwrap();
    let code = cli_main([
        "csvt-couple", "couple", "--config", s(&cfg), "--targets-file", s(&pts), "--region", "bnd",
    ]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn couple_overrides_times_mode_and_targets() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = default_fixture(dir.path());
    let pts = dir.path().join("t.csv");
    fs::write(&pts, "0.5,0.5\n").unwrap();
    let out = dir.path().join("o");
    let code = cli_main([
        "csvt-couple", "couple", "--config", s(&cfg), "--targets-file", s(&pts), "--times",
        "0.0005", "--time-mode", "linear", "--k", "4", "--p", "2", "--backend", "linear",
        "--output", s(&out), "--log-level", "info",
    ]);
    assert_eq!(code, EXIT_OK);
    let body = fs::read_to_string(out.join("acouPot_0000.csv")).unwrap();
    let value: f64 = body.lines().nth(1).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    // Centre is the corner mean: 1.5 and 5.5, blended halfway.
    assert!((value - 3.5).abs() < 1e-12, "{value}");
    let master = fs::read_to_string(out.join("acouPot.descrip")).unwrap();
    assert!(master.contains("0.0005,acouPot_0000.csv"));
}

#[test]
fn couple_fails_cleanly_on_missing_config() {
    let code = cli_main(["csvt-couple", "couple", "--config", "/definitely/not/here.xml"]);
    assert_eq!(code, EXIT_FAILURE);
}

#[test]
fn quadrature_dump() {
    let dir = tempfile::tempdir().unwrap();
    default_fixture(dir.path());
    let out = dir.path().join("q.csv");
    let o = run_bin(&[
        "quadrature", "--mesh", s(&dir.path().join("square.msh")), "--region", "bnd", "--order",
        "1", "--output", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# x,y,z,element,local,weight,nx,ny");
    assert_eq!(lines.len(), 5);
    let first: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(first, vec![0.5, 0.0, 0.0, 2.0, 0.0, 1.0, 0.0, -1.0]);

    let domain = run_bin(&[
        "quadrature", "--mesh", s(&dir.path().join("square.msh")), "--region", "domain",
        "--output", s(&out),
    ]);
    assert_eq!(domain.status.code(), Some(EXIT_OK));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().nth(1).unwrap().ends_with(",,"));

    let missing = run_bin(&["quadrature", "--mesh", "nope.msh", "--output", s(&out)]);
    assert_eq!(missing.status.code(), Some(EXIT_FAILURE));
}
