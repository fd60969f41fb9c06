use std::fs;
use std::path::Path;
use std::process::Command;

use mhd_fem::cli::{run, SimulationConfig};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mhd-fem"))
}

fn config(sets: &[&str]) -> SimulationConfig {
    let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
    SimulationConfig::from_text_and_sets("", &sets).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn single_run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&["problem=brio_wu", "nx=100", "viscosity=first_order", "snapshots=3", "t_final=0.02"]);
    let out = run(&cfg, dir.path()).unwrap();
    assert!(out.passed());
    let hist = read(dir.path(), "entropy_history.csv");
    let mut lines = hist.lines();
    assert_eq!(lines.next(), Some("t,min_s,min_rho,min_rhoe,divB"));
    assert_eq!(lines.count(), 1000);
    for k in 0..3 {
        let snap = read(dir.path(), &format!("snapshot_{k:04}.csv"));
        assert!(snap.starts_with("x,rho,mx,my,E,Bx,By,p,eps\n"));
        assert_eq!(snap.lines().count(), 102);
    }
    assert!(!dir.path().join("errors.csv").exists());
    let manifest = read(dir.path(), "run_manifest.txt");
    assert!(manifest.contains("id = brio_wu") && manifest.contains("wall_time_s"));
}

#[test]
fn outputs_are_deterministic_and_manifest_reproduces() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = config(&["problem=orszag_tang", "nx=12", "t_final=0.01", "snapshots=2", "monitor_samples=20"]);
    run(&cfg, a.path()).unwrap();
    let again = SimulationConfig::from_text_and_sets(&read(a.path(), "run_manifest.txt"), &[]).unwrap();
    assert_eq!(again.echo(), cfg.echo());
    run(&again, b.path()).unwrap();
    for name in ["entropy_history.csv", "snapshot_0000.csv", "snapshot_0001.csv", "snapshot_0001.vtk"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let vtk = read(a.path(), "snapshot_0001.vtk");
    assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
    assert!(vtk.contains("POINTS 169 double") && vtk.contains("CELLS 288 1152"));
}

#[test]
fn sweep_writes_error_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&["problem=vortex", "sweep=8,16", "t_final=0.01", "snapshots=0", "monitor_samples=0"]);
    let out = run(&cfg, dir.path()).unwrap();
    assert!(out.passed());
    let csv = read(dir.path(), "errors.csv");
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("dofs,degree,component,L1,L2,rate"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("64,1,u,"));
    assert!(rows[3].starts_with("256,1,B,"));
    assert!(dir.path().join("mesh_8").is_dir() && dir.path().join("mesh_16").is_dir());
}

#[test]
fn failure_keeps_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // the low-beta blast loses positivity in its first stage at this CFL
    let cfg = config(&["problem=blast", "nx=16", "snapshots=2"]);
    let out = run(&cfg, dir.path()).unwrap();
    assert!(!out.passed());
    assert!(read(dir.path(), "failure.txt").contains("internal energy"));
    assert!(dir.path().join("failure_state.csv").exists());
    assert!(dir.path().join("entropy_history.csv").exists());
    assert!(read(dir.path(), "run_manifest.txt").contains("status = failed"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = binary()
        .args(["--set", "problem=contact", "--set", "nx=50", "--set", "t_final=0.01", "--out"])
        .arg(dir.path().join("ok"))
        .status()
        .unwrap();
    assert_eq!(ok.code(), Some(0));

    let bad_key = binary().args(["--set", "mesh.bogus=3", "--out"]).arg(dir.path().join("bad")).status().unwrap();
    assert_eq!(bad_key.code(), Some(2));

    let bad_suite = binary().args(["--suite", "nope", "--out"]).arg(dir.path().join("suite")).status().unwrap();
    assert_eq!(bad_suite.code(), Some(2));

    let missing = binary().args(["--config", "/nonexistent/cfg.txt"]).status().unwrap();
    assert_eq!(missing.code(), Some(2));

    let cfg_path = dir.path().join("blast.cfg");
    fs::write(&cfg_path, "[problem]\nid = blast\n[mesh]\nnx = 16\n").unwrap();
    let fail = binary().arg("--config").arg(&cfg_path).arg("--out").arg(dir.path().join("fail")).status().unwrap();
    assert_eq!(fail.code(), Some(1));
}

#[test]
fn resistive_rotor_without_cleaning_warns_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = binary()
        .args(["--set", "problem=rotor", "--set", "flux=resistive", "--set", "cleaning=off"])
        .args(["--set", "nx=16", "--set", "t_final=0.002", "--set", "viscosity=first_order", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("divergence growth expected"));
}
