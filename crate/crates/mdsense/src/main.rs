use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mdsense::bounds::bounds_report;
use mdsense::config::{ExperimentConfig, ExperimentKind};
use mdsense::suite::{run_invariant_suite, DEFAULT_SEED};
use mdsense::sweep::{run_alpha_sweep, run_single, CellFailure};
use mdsense::{output, AppError};
use mdsense_core::parallel::Schedule;

/// Mirror descent vs gradient descent for low-rank matrix sensing.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an alpha sweep and write results.csv (and SVG panels).
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run every configured algorithm once, keeping full trajectories.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the invariant suite; prints one JSON object per invariant.
    Check {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Print recovery-bound values for the configured instance.
    Bounds {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Sizes the rayon pool from `MDSENSE_THREADS`; `1` runs sequentially.
fn schedule_from_env() -> Result<Schedule, AppError> {
    let Ok(raw) = std::env::var("MDSENSE_THREADS") else {
        return Ok(Schedule::Parallel);
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| AppError::Config(format!("MDSENSE_THREADS must be a positive integer, got {raw:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| AppError::Config(format!("thread pool: {e}")))?;
    Ok(if threads == 1 { Schedule::Sequential } else { Schedule::Parallel })
}

fn load(path: &Path, expected: ExperimentKind, command: &str) -> Result<ExperimentConfig, AppError> {
    let cfg = ExperimentConfig::from_file(path)?;
    if cfg.experiment != expected {
        return Err(AppError::Config(format!("`{command}` cannot run experiment {:?}", cfg.experiment)));
    }
    Ok(cfg)
}

fn warn(failures: &[CellFailure]) {
    for f in failures {
        eprintln!("warning: {} at alpha = {:e} stopped early: {}", f.algorithm, f.alpha, f.message);
    }
}

fn check(seed: u64) -> Result<(), AppError> {
    let reports = run_invariant_suite(seed);
    for r in &reports {
        println!("{}", serde_json::to_string(r).expect("report serializes"));
    }
    match reports.iter().filter(|r| !r.passed).count() {
        0 => Ok(()),
        failed => Err(AppError::InvariantFailure(failed)),
    }
}

fn execute(command: Command) -> Result<(), AppError> {
    let schedule = schedule_from_env()?;
    match command {
        Command::Sweep { config } => {
            let cfg = load(&config, ExperimentKind::AlphaSweep, "sweep")?;
            let out = run_alpha_sweep(&cfg, schedule)?;
            warn(&out.failures);
            for path in output::emit_outputs(&out.rows, &cfg)? {
                println!("{}", path.display());
            }
        }
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            match cfg.experiment {
                ExperimentKind::InvariantSuite => return check(cfg.seed),
                ExperimentKind::AlphaSweep => return Err(AppError::Config("use `sweep` for alpha-sweep configs".into())),
                ExperimentKind::SingleRun => {}
            }
            let out = run_single(&cfg, schedule)?;
            warn(&out.failures);
            for path in output::emit_outputs(&out.rows, &cfg)? {
                println!("{}", path.display());
            }
            for path in output::emit_trajectories(&out.trajectories, &cfg.output_dir)? {
                println!("{}", path.display());
            }
        }
        Command::Check { seed } => check(seed)?,
        Command::Bounds { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let report = bounds_report(&cfg, schedule)?;
            println!("{}", serde_json::json!({ "instance": report.instance }));
            for line in &report.lines {
                println!("{}", serde_json::to_string(line).expect("bound serializes"));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
