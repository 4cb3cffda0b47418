use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ale-idp"))
}

#[test]
fn run_writes_reports_and_vtk() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "run",
            "--problem",
            "sod",
            "--level",
            "0",
            "--final-time",
            "0.05",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let reports = fs::read_to_string(dir.path().join("reports.csv")).unwrap();
    let mut lines = reports.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,t,dt,reductions,min_convexity,conservation_defect,entropy_max"
    );
    assert!(lines.count() > 10);
    let vtk = fs::read_to_string(dir.path().join("solution.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version"));
    assert!(vtk.contains("SCALARS u0"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# coarse Burgers\nproblem = burgers2d\nfinal_time = 0.5\nfem = p1\n",
    )
    .unwrap();
    let out = bin()
        .args(["run", "--level", "0", "--final-time", "0.02", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("burgers2d"), "{stdout}");
    assert!(stdout.contains("t 0.020000"), "{stdout}");
}

#[test]
fn converge_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "converge",
            "--problem",
            "rotation",
            "--no-viscosity",
            "--levels",
            "0..1",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "dofs,h,l1,l1_rate,l2,l2_rate");
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn bad_input_fails_with_configuration_code() {
    let out = bin().args(["run", "--problem", "vortex"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["converge", "--problem", "kpp", "--levels", "0..1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "kpp has no exact solution");
}

#[test]
fn check_passes() {
    let out = bin().args(["check", "--seed", "11"]).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 7);
}
