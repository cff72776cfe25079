use std::path::Path;
use std::process::{Command, Output};

fn stfem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stfem")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn malformed_config_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "case.name = pressure-pulse\nthis line is wrong\n").unwrap();
    let out = stfem(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert!(!out.status.success());
    let err = text(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn unknown_case_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = stfem(&["run", "--case", "valve", "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("valve"));
    let out = stfem(&["run", "--case", "pressure-pulse", "--method", "xst", "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn coarse_pressure_pulse_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("pulse.cfg");
    std::fs::write(&cfg, "# coarse variant\ncase.elems_per_lambda = 20\noutput.vtk = true\n").unwrap();
    let o = dir.path().join("out");
    let out = stfem(&[
        "run", "--case", "pressure-pulse", "--method", "fst", "--cfl", "2", "--config", cfg.to_str().unwrap(), "--out", o.to_str().unwrap(), "--threads", "1",
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("slabs = 10") && stdout.contains("l2_error_relative"), "{stdout}");
    let csv = std::fs::read_to_string(o.join("centerline.csv")).unwrap();
    assert_eq!(csv.lines().count(), 402);
    assert!(csv.starts_with("x,p,u1,T,p_ref"));
    for f in ["summary.txt", "convergence.log", "final.vtk"] {
        assert!(Path::new(&o.join(f)).is_file(), "{f}");
    }
}

#[test]
fn custom_case_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("strip.stmesh");
    let mut s = String::from("stmesh 1 5 4 2\n");
    for i in 0..5 {
        s += &format!("{i} {}\n", i as f64 * 0.25);
    }
    for e in 0..4 {
        s += &format!("{e} {e} {}\n", e + 1);
    }
    s += "left 0\nright 4\n";
    std::fs::write(&mesh, s).unwrap();
    let cfg = dir.path().join("custom.cfg");
    std::fs::write(
        &cfg,
        format!(
            "case.name = custom\ncase.mesh = {}\ncase.dt = 1e-3\ncase.slabs = 2\ninitial.state = 1e5 5 300\nbc.left = 1e5 5 300\nbc.right = - 5 -\noutput.line = 0 1 11\n",
            mesh.display()
        ),
    )
    .unwrap();
    let o = dir.path().join("out");
    let out = stfem(&["run", "--config", cfg.to_str().unwrap(), "--out", o.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert_eq!(std::fs::read_to_string(o.join("line.csv")).unwrap().lines().count(), 12);
    let summary = std::fs::read_to_string(o.join("summary.txt")).unwrap();
    assert!(summary.contains("max_newton_per_slab = 1"), "{summary}");
}
