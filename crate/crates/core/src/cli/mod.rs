//! Configuration-driven driver: single runs, refinement sweeps and the
//! canned benchmark suites, with their file outputs.

pub mod config;
pub mod output;
pub mod suite;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::diagnostics::{convergence_table, error_norms, EntropyMonitor, ErrorReport};
use crate::error::{MhdError, Result};
use crate::problems::{vortex_exact, ProblemSpec, Reference};
use crate::solver::{Simulation, SolverOptions};

pub use config::{parse_assignment, parse_config, CleaningMode, SimulationConfig};
use output::{snapshot_csv, snapshot_vtk, write_file};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    NumericalFailure = 1,
    ConfigError = 2,
}

/// True for errors caused by the input rather than the numerics.
pub fn is_config_error(e: &MhdError) -> bool {
    matches!(
        e,
        MhdError::Config(_)
            | MhdError::UnknownProblem(_)
            | MhdError::UnknownWave(_)
            | MhdError::InvalidGas(_)
            | MhdError::InvalidDomain(_)
            | MhdError::InadmissibleIc { .. }
            | MhdError::NullspaceUnpinned
            | MhdError::Io(_)
    )
}

pub fn exit_status_for(e: &MhdError) -> ExitStatus {
    if is_config_error(e) {
        ExitStatus::ConfigError
    } else {
        ExitStatus::NumericalFailure
    }
}

/// Result of one simulation at one resolution.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub cells: [usize; 2],
    pub dofs: usize,
    pub steps: usize,
    pub failure: Option<String>,
    pub monitor: EntropyMonitor,
    pub errors: Option<ErrorReport>,
    /// `max eps_H` over the nodes at the last step.
    pub eps_high_final: Option<f64>,
    /// Final (or last admissible) simulation state.
    pub sim: Simulation,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<RunRecord>,
    pub warnings: Vec<String>,
    pub errors_csv: Option<String>,
    pub wall_time: f64,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.failure.is_none())
    }

    pub fn status(&self) -> ExitStatus {
        if self.passed() {
            ExitStatus::Pass
        } else {
            ExitStatus::NumericalFailure
        }
    }
}

fn reference_errors(sim: &Simulation) -> Option<ErrorReport> {
    match &sim.problem.reference {
        Some(Reference::Vortex(params)) => {
            let t = sim.t;
            Some(error_norms(&sim.space, &sim.u, |x| vortex_exact(x[0], x[1], t, params)))
        }
        _ => None,
    }
}

struct FileLog {
    dir: PathBuf,
    prefix: String,
    hashes: Vec<(String, String)>,
}

impl FileLog {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let hash = write_file(&self.dir, name, contents)?;
        self.hashes.push((format!("{}{name}", self.prefix), hash));
        Ok(())
    }
}

fn write_snapshot(log: &mut FileLog, sim: &Simulation, name: &str, vtk: bool) -> Result<()> {
    log.write(&format!("{name}.csv"), &snapshot_csv(sim))?;
    if vtk && sim.problem.dim == 2 {
        log.write(&format!("{name}.vtk"), &snapshot_vtk(sim, &format!("{} t={:.17e}", sim.problem.id, sim.t)))?;
    }
    Ok(())
}

fn run_one(cfg: &SimulationConfig, problem: ProblemSpec, opts: SolverOptions, log: &mut FileLog) -> Result<RunRecord> {
    let mut sim = Simulation::new(problem, opts)?;
    let t_final = sim.problem.t_final;
    let mut monitor = EntropyMonitor::new(t_final, cfg.monitor_samples.max(2));
    monitor.observe(sim.monitor_row());
    let snap_time = |j: usize| t_final * j as f64 / (cfg.snapshots.max(2) - 1) as f64;
    let mut next_snap = 0;
    let mut take_snapshots = |sim: &Simulation, log: &mut FileLog, done: bool| -> Result<()> {
        while next_snap < cfg.snapshots && (sim.t >= snap_time(next_snap) * (1.0 - 1e-12) || done && next_snap + 1 == cfg.snapshots) {
            write_snapshot(log, sim, &format!("snapshot_{next_snap:04}"), cfg.vtk)?;
            next_snap += 1;
        }
        Ok(())
    };
    take_snapshots(&sim, log, false)?;
    let mut failure = None;
    while !sim.finished() {
        match sim.step() {
            Ok(_) => {
                monitor.observe(sim.monitor_row());
                take_snapshots(&sim, log, sim.finished())?;
            }
            Err(e) => {
                failure = Some(format!("t = {:.17e}, step {}: {e}", sim.t, sim.steps + 1));
                break;
            }
        }
    }
    monitor.finish();
    if cfg.monitor_samples > 0 {
        log.write("entropy_history.csv", &monitor.to_csv())?;
    }
    let errors = if failure.is_none() { reference_errors(&sim) } else { None };
    if let Some(f) = &failure {
        write_snapshot(log, &sim, "failure_state", cfg.vtk)?;
        log.write("failure.txt", &format!("{f}\n"))?;
    }
    Ok(RunRecord {
        cells: sim.options.cells,
        dofs: sim.n_dofs(),
        steps: sim.steps,
        failure,
        monitor,
        errors,
        eps_high_final: (!sim.eps_high.is_empty()).then(|| sim.eps_high.iter().copied().fold(0.0, f64::max)),
        sim,
    })
}

/// Runs `cfg` writing every output under `out`. Numerical failures are
/// recorded in the outcome; configuration and I/O problems are errors.
pub fn run(cfg: &SimulationConfig, out: &Path) -> Result<RunOutcome> {
    let start = Instant::now();
    let (problem, all_opts) = cfg.solver_options()?;
    fs::create_dir_all(out)?;
    let warnings = cfg.warnings();
    let mut hashes = Vec::new();
    let mut records = Vec::new();
    let sweep = all_opts.len() > 1;
    for opts in all_opts {
        let (dir, prefix) = if sweep {
            let name = format!("mesh_{}", opts.cells[0]);
            (out.join(&name), format!("{name}/"))
        } else {
            (out.to_path_buf(), String::new())
        };
        fs::create_dir_all(&dir)?;
        let mut log = FileLog { dir, prefix, hashes: Vec::new() };
        let rec = run_one(cfg, problem.clone(), opts, &mut log)?;
        hashes.append(&mut log.hashes);
        records.push(rec);
    }
    let mut top = FileLog { dir: out.to_path_buf(), prefix: String::new(), hashes: Vec::new() };
    let reports: Vec<ErrorReport> = records.iter().filter_map(|r| r.errors.clone()).collect();
    let errors_csv = if !reports.is_empty() && reports.len() == records.len() {
        let (csv, text) = convergence_table(&reports);
        top.write("errors.csv", &csv)?;
        top.write("errors.txt", &text)?;
        Some(csv)
    } else {
        None
    };
    hashes.append(&mut top.hashes);
    let outcome = RunOutcome { records, warnings, errors_csv, wall_time: start.elapsed().as_secs_f64() };
    write_manifest(cfg, &outcome, &hashes, out)?;
    Ok(outcome)
}

fn write_manifest(cfg: &SimulationConfig, outcome: &RunOutcome, hashes: &[(String, String)], out: &Path) -> Result<()> {
    let echo = cfg.echo();
    let version = env!("CARGO_PKG_VERSION");
    let mut s = String::new();
    let _ = writeln!(s, "# run manifest; the [problem] to [output] sections reproduce the run via --config\n");
    s.push_str(&echo);
    let _ = writeln!(s, "\n[provenance]");
    let _ = writeln!(s, "# solver = mhd-fem {version}");
    let _ = writeln!(s, "# config_sha256 = {}", output::sha256_hex(echo.as_bytes()));
    let _ = writeln!(s, "# provenance_sha256 = {}", output::sha256_hex(format!("mhd-fem {version}\n{echo}").as_bytes()));
    let _ = writeln!(s, "\n[result]");
    let _ = writeln!(s, "# status = {}", if outcome.passed() { "completed" } else { "failed" });
    for r in &outcome.records {
        let _ = writeln!(
            s,
            "# mesh {}x{}: dofs = {}, steps = {}, t = {:.17e}, {}",
            r.cells[0],
            r.cells[1],
            r.dofs,
            r.steps,
            r.sim.t,
            r.failure.as_deref().unwrap_or("ok")
        );
    }
    for w in &outcome.warnings {
        let _ = writeln!(s, "# warning: {w}");
    }
    let _ = writeln!(s, "# wall_time_s = {:.3}", outcome.wall_time);
    let _ = writeln!(s, "\n[files]");
    let mut sorted = hashes.to_vec();
    sorted.sort();
    for (name, hash) in sorted {
        let _ = writeln!(s, "# {name} sha256 = {hash}");
    }
    fs::write(out.join("run_manifest.txt"), s)?;
    Ok(())
}
