use std::path::Path;
use std::process::{Command, Output};

use bochner_cli::{InstanceFile, SetFile, SetKind, SpaceFile};
use serde_json::Value;

fn bochner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bochner")).args(args).output().unwrap()
}

fn two_atom(kind: SetKind, element: [f64; 2], direction: Option<[f64; 2]>) -> InstanceFile {
    InstanceFile {
        space: SpaceFile {
            weights: vec![1.0, 1.0],
            dim: 1,
            rho: 2.0,
            p: 2.0,
        },
        element: element.iter().map(|x| vec![*x]).collect(),
        set: SetFile {
            kind,
            support: vec![0],
            center: None,
            radius: (kind != SetKind::Subspace).then_some(1.0),
        },
        direction: direction.map(|d| d.iter().map(|x| vec![*x]).collect()),
    }
}

fn run_on(cmd: &str, inst: &InstanceFile, dir: &Path) -> (Option<i32>, Value) {
    let input = dir.join(format!("{cmd}-in.json"));
    let output = dir.join(format!("{cmd}-out.json"));
    inst.save(&input).unwrap();
    let out = bochner(&[cmd, "--in", input.to_str().unwrap(), "--out", output.to_str().unwrap()]);
    let value = serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    (out.status.code(), value)
}

fn rows(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()))
        .collect()
}

#[test]
fn instance_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    let mut inst = two_atom(SetKind::Cylinder, [0.1 + 0.2, -1.0 / 3.0], Some([1e-17, 7.0]));
    inst.space = SpaceFile {
        weights: vec![0.7, std::f64::consts::PI],
        dim: 1,
        rho: 1.5,
        p: 3.0,
    };
    inst.set.center = Some(vec![vec![f64::MIN_POSITIVE], vec![0.0]]);
    inst.save(&path).unwrap();
    assert_eq!(InstanceFile::load(&path).unwrap(), inst);
}

#[test]
fn project_writes_projection_and_region() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v) = run_on("project", &two_atom(SetKind::Ball, [2.0, 3.0], None), dir.path());
    assert_eq!(code, Some(0));
    assert_eq!(rows(&v["projection"]), vec![1.0, 0.0]);
    assert_eq!(v["region"], "OUTSIDE_CYLINDER_OFF_SUBSPACE");
    let (code, v) = run_on("project", &two_atom(SetKind::Cylinder, [2.0, 3.0], None), dir.path());
    assert_eq!(code, Some(0));
    assert_eq!(rows(&v["projection"]), vec![1.0, 3.0]);
    let (_, v) = run_on("project", &two_atom(SetKind::Subspace, [2.0, 3.0], None), dir.path());
    assert_eq!(rows(&v["projection"]), vec![2.0, 0.0]);
    assert!(v["region"].is_null());
}

#[test]
fn derivative_reports_closed_form_and_fd() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v) = run_on(
        "derivative",
        &two_atom(SetKind::Cylinder, [2.0, 3.0], Some([0.5, -1.0])),
        dir.path(),
    );
    assert_eq!(code, Some(0));
    assert_eq!(v["status"], "OK");
    // Outside the cylinder at p = 2 in one dimension the A row is frozen on the sphere.
    let closed = rows(&v["closed_form"]);
    assert!(closed[0].abs() < 1e-12 && (closed[1] + 1.0).abs() < 1e-12, "{closed:?}");
    assert!(v["residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn derivative_at_the_sphere_is_not_covered() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v) = run_on(
        "derivative",
        &two_atom(SetKind::Ball, [1.0, 0.0], Some([1.0, 0.0])),
        dir.path(),
    );
    assert_eq!(code, Some(2));
    assert_eq!(v["status"], "NOT_COVERED");
    assert!(v.get("closed_form").is_none());
}

#[test]
fn input_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(
        bochner(&["project", "--in", bad.to_str().unwrap()]).status.code(),
        Some(3)
    );
    let mut inst = two_atom(SetKind::Ball, [2.0, 3.0], None);
    inst.set.radius = Some(0.0);
    inst.save(&bad).unwrap();
    assert_eq!(
        bochner(&["project", "--in", bad.to_str().unwrap()]).status.code(),
        Some(3)
    );
    inst.set.radius = Some(1.0);
    inst.save(&bad).unwrap();
    assert_eq!(
        bochner(&["derivative", "--in", bad.to_str().unwrap()]).status.code(),
        Some(3),
        "no direction"
    );
    assert_eq!(bochner(&["verify", "--suite", "everything"]).status.code(), Some(3));
    assert_eq!(bochner(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(bochner(&["--help"]).status.code(), Some(0));
    let missing = dir.path().join("no/such/dir/report.json");
    let out = bochner(&[
        "verify",
        "--suite",
        "hilbert",
        "--instances",
        "2",
        "--out",
        missing.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_is_deterministic_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = ["1", "4"]
        .iter()
        .map(|j| dir.path().join(format!("r{j}.json")))
        .collect();
    for (j, p) in ["1", "4"].iter().zip(&paths) {
        let out = bochner(&[
            "verify",
            "--suite",
            "derivatives",
            "--seed",
            "5",
            "--instances",
            "6",
            "--jobs",
            j,
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    }
    let a = std::fs::read_to_string(&paths[0]).unwrap();
    let b = std::fs::read_to_string(&paths[1]).unwrap();
    assert_eq!(a, b);
}

#[test]
fn verify_numeric_psi_runs() {
    let out = bochner(&[
        "verify",
        "--suite",
        "smoothness",
        "--instances",
        "5",
        "--psi",
        "numeric",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS: "));
}
