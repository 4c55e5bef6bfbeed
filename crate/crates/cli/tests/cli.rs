use std::path::Path;
use std::process::{Command, Output};

fn quatsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quatsurf")).args(args).output().expect("spawn quatsurf")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn catalog_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("torus.json");
    let p = path.to_str().unwrap();
    let o = quatsurf(&["catalog", "clifford-torus", "--grid", "24x24", "--out", p]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(Path::new(p).exists());

    let o = quatsurf(&["analyze", p]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(&o);
    assert_eq!(rep["pass"], true);
    assert!((rep["functionals"]["w"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 3e-2);
}

#[test]
fn analyze_with_everything() {
    let o = quatsurf(&["analyze", "clifford-torus", "--grid", "32x32", "--all"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(&o);
    assert!(rep["lift"].is_object());
    assert!(rep["duality"].is_object());
    assert_eq!(rep["transforms"].as_array().map(Vec::len), Some(4));
}

#[test]
fn input_errors_exit_3() {
    assert_eq!(code(&quatsurf(&["analyze", "no-such-surface"])), 3);
    assert_eq!(code(&quatsurf(&["catalog", "sphere", "--grid", "2x2"])), 3);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"type\": \"grid\", \"nu\": 3}").unwrap();
    assert_eq!(code(&quatsurf(&["analyze", bad.to_str().unwrap()])), 3);
}

#[test]
fn strict_conformal_tolerance_is_an_input_error() {
    // a non-conformal chart rejected by the tolerance override
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("skew.json");
    let n = 8;
    let values: Vec<[f64; 4]> =
        (0..n * n).map(|k| [0.0, (k % n) as f64 * 0.1, 2.0 * (k / n) as f64 * 0.1, 0.0]).collect();
    let doc = serde_json::json!({
        "type": "grid", "nu": n, "nv": n, "du": 0.1, "dv": 0.1,
        "periodic_u": false, "periodic_v": false, "values": values,
    });
    std::fs::write(&path, doc.to_string()).unwrap();
    assert_eq!(code(&quatsurf(&["analyze", path.to_str().unwrap(), "--tol", "1e-6"])), 3);
}

#[test]
fn transforms_emit_surface_json_with_diagnostics() {
    let o = quatsurf(&["transform", "forward", "clifford-torus", "--grid", "24x24"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&o);
    assert_eq!(doc["nu"], 24);
    assert_eq!(doc["diagnostics"]["transform"], "forward");
    assert!(doc["diagnostics"]["closedness_defect"].as_f64().unwrap() < 1e-1);

    // two-step transforms of a sphere are masked everywhere
    let o = quatsurf(&["transform", "two-forward", "sphere", "--grid", "16x16"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn lift_writes_csv() {
    let o = quatsurf(&["lift", "complex-graph", "--grid", "32x32"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iu,iv,re0,im0,re1,im1,re2,im2,re3,im3"));
    assert!(lines.count() > 0);
}

#[test]
fn duality_on_the_torus() {
    let o = quatsurf(&["duality", "clifford-torus", "--grid", "32x32"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let d = json(&o);
    assert!(d["s_self_adjoint"].as_f64().unwrap() < 1e-9);
    assert_eq!(d["degenerate"], false);

    // the complex graph lives in all of H, not Im H
    assert_eq!(code(&quatsurf(&["duality", "complex-graph", "--grid", "16x16"])), 3);
}

#[test]
fn export_formats() {
    let o = quatsurf(&["export", "catenoid", "--grid", "8x6", "--format", "obj"]);
    assert_eq!(code(&o), 0);
    let obj = String::from_utf8(o.stdout).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 48);

    let o = quatsurf(&["export", "catenoid", "--grid", "8x6", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("iu,iv,u,v,f_w"));
    assert_eq!(csv.lines().count(), 49);

    assert_ne!(code(&quatsurf(&["export", "catenoid", "--axes", "1,2,7"])), 0);
}
