use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use mhd_fem::cli::suite::run_suite;
use mhd_fem::cli::{exit_status_for, run, ExitStatus, SimulationConfig};

/// Finite element solver for ideal MHD.
#[derive(Debug, Parser)]
#[command(name = "mhd-fem", version)]
struct Args {
    /// Configuration file (`key = value` lines, optional `[section]` headers).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration entry; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Run a benchmark suite: paper_tables, entropy_principles or shocks_2d.
    #[arg(long)]
    suite: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn exit(status: ExitStatus) -> ExitCode {
    ExitCode::from(status as u8)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit(ExitStatus::ConfigError) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(name) = &args.suite {
        if args.config.is_some() || !args.set.is_empty() {
            eprintln!("error: --suite takes no --config or --set");
            return exit(ExitStatus::ConfigError);
        }
        return match run_suite(name, &args.out) {
            Ok(report) => {
                print!("{}", report.summary());
                exit(if report.passed() { ExitStatus::Pass } else { ExitStatus::NumericalFailure })
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit(exit_status_for(&e))
            }
        };
    }
    let text = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return exit(ExitStatus::ConfigError);
            }
        },
        None => String::new(),
    };
    let cfg = match SimulationConfig::from_text_and_sets(&text, &args.set) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit(ExitStatus::ConfigError);
        }
    };
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    match run(&cfg, &args.out) {
        Ok(outcome) => {
            for r in &outcome.records {
                match &r.failure {
                    None => println!("{}x{}: {} dofs, {} steps, t = {}", r.cells[0], r.cells[1], r.dofs, r.steps, r.sim.t),
                    Some(f) => println!("{}x{}: failed at {f}", r.cells[0], r.cells[1]),
                }
            }
            if let Some(csv) = &outcome.errors_csv {
                print!("{csv}");
            }
            exit(outcome.status())
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit(exit_status_for(&e))
        }
    }
}
