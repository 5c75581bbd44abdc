use std::path::Path;
use std::process::{Command, Output};

fn polyvem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyvem")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = polyvem(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn generate_quality_solve_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("hex");
    let data = data.to_str().unwrap();
    ok(&["generate", "--dataset", "hex-uniform", "--levels", "2", "--out", data]);
    assert!(Path::new(data).join("metadata.json").is_file());

    let level0 = format!("{data}/level0.pmesh");
    let q: serde_json::Value = serde_json::from_str(&ok(&["quality", "--mesh", &level0])).unwrap();
    assert!((q["global_rho"].as_f64().unwrap() - 0.82176).abs() < 1e-4);

    let vtk = dir.path().join("u.vtk");
    let row: serde_json::Value =
        serde_json::from_str(&ok(&["solve", "--mesh", &level0, "--problem", "patch", "--out", vtk.to_str().unwrap()]))
            .unwrap();
    assert!(row["err_l2"].as_f64().unwrap() < 1e-10);
    assert!(vtk.is_file());

    ok(&["report", "--dataset", data, "--problem", "patch"]);
    let csv = std::fs::read_to_string(Path::new(data).join("report.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "dataset,level,h,dofs,rho,err_l2,err_h1,err_linf,rate_l2,rate_h1");
    assert_eq!(csv.lines().count(), 3);
    for svg in ["errors.svg", "quality.svg"] {
        assert!(Path::new(data).join(svg).is_file());
    }
}

#[test]
fn bad_input_exits_with_one() {
    let out = polyvem(&["report", "--dataset", "hex-poisson"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(polyvem(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(polyvem(&["generate", "--dataset", "tet-uniform"]).status.code(), Some(2));
}
