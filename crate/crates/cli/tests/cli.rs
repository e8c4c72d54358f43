use std::path::Path;
use std::process::{Command, Output};

fn hcurl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcurl")).args(args).output().expect("spawn hcurl")
}

fn run_cube(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "cube_poly", "--sizes", "1,2", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    hcurl(&args)
}

#[test]
fn run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_cube(dir.path(), &["--vtk"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["report.csv", "report.json", "mesh_level_1.vtk", "mesh_level_2.vtk"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn sequential_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(run_cube(a.path(), &["--sequential"]).status.success());
    assert!(run_cube(b.path(), &["--sequential"]).status.success());
    let read = |d: &Path| std::fs::read(d.join("report.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("res");
    std::fs::write(
        &cfg,
        format!("# cube run\nproblem = cube_poly\nsizes = 1,2,3\ndegree = 1\nout = {}\n", out.display()),
    )
    .unwrap();
    let o = hcurl(&["run", "--config", cfg.to_str().unwrap(), "--sizes", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn bad_input_fails_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(hcurl(&["run", "sphere", "--out", out]).status.code(), Some(2));
    assert_eq!(hcurl(&["run", "cube_poly", "--theta", "1.5", "--out", out]).status.code(), Some(2));
    // The run itself failed, so a failure record is left behind.
    let rec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("failure.json")).unwrap()).unwrap();
    assert_eq!(rec["status"], "error");
    assert!(rec["message"].as_str().unwrap().contains("theta"));
}

#[test]
fn list_names_the_problems() {
    let o = hcurl(&["list"]);
    assert!(o.status.success());
    let s = String::from_utf8(o.stdout).unwrap();
    for p in ["cube_poly", "lbrick_singular", "cube_jump_mu"] {
        assert!(s.contains(p), "{s}");
    }
}
