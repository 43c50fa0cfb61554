//! α-sweeps and single runs.

use std::time::Instant;

use mdsense_core::nucmin::{nucmin, NucminConfig};
use mdsense_core::optim::{self, Problem, Trajectory};
use mdsense_core::parallel::{self, Schedule};
use mdsense_core::{metrics, DenseMatrix};

use crate::config::{AlgorithmName, AlgorithmSpec, ExperimentConfig};
use crate::{AppError, Instance};

pub const GROUND_TRUTH: &str = "ground-truth";
pub const NUCMIN: &str = "nucmin";

/// One line of `results.csv`. Reference rows carry `alpha = 0`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ResultRow {
    pub alpha: f64,
    pub algorithm: String,
    pub final_risk: f64,
    pub nuclear_norm: f64,
    pub effective_rank: f64,
    pub recon_error: f64,
    pub iters_run: usize,
    pub wall_ms: f64,
}

impl ResultRow {
    pub fn is_reference(&self) -> bool {
        self.algorithm == GROUND_TRUTH || self.algorithm == NUCMIN
    }
}

/// A cell that stopped early. Its row holds the metrics of the last good
/// iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub alpha: f64,
    pub algorithm: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<CellFailure>,
    /// Measure/adjoint calls served by the completion fast path.
    pub mask_fast_path_evals: u64,
}

fn row_for(inst: &Instance, alpha: f64, algorithm: &str, x: &DenseMatrix, iters_run: usize, wall_ms: f64) -> Result<ResultRow, AppError> {
    let nuclear_norm = metrics::nuclear_norm(x)?;
    Ok(ResultRow {
        alpha,
        algorithm: algorithm.to_string(),
        final_risk: inst.ens.risk(&inst.y, x)?,
        nuclear_norm,
        effective_rank: if nuclear_norm > 0.0 { metrics::effective_rank(x)? } else { 0.0 },
        recon_error: metrics::recon_error(x, &inst.truth.matrix)?,
        iters_run,
        wall_ms,
    })
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Ground-truth and nucmin rows; they depend only on the instance.
pub fn reference_rows(inst: &Instance) -> Result<(Vec<ResultRow>, Vec<CellFailure>), AppError> {
    let mut failures = Vec::new();
    let truth = row_for(inst, 0.0, GROUND_TRUTH, &inst.truth.matrix, 0, 0.0)?;
    let start = Instant::now();
    let cfg = NucminConfig {
        psd: inst.truth.psd,
        ..NucminConfig::default()
    };
    let base = match nucmin(&inst.ens, &inst.y, &cfg) {
        Ok(out) => row_for(inst, 0.0, NUCMIN, &out.matrix, out.iters, elapsed_ms(start))?,
        Err(fail) => {
            failures.push(CellFailure {
                alpha: 0.0,
                algorithm: NUCMIN.into(),
                message: fail.error.to_string(),
            });
            match fail.best {
                Some(best) => row_for(inst, 0.0, NUCMIN, &best.matrix, best.iters, elapsed_ms(start))?,
                None => ResultRow {
                    alpha: 0.0,
                    algorithm: NUCMIN.into(),
                    final_risk: f64::NAN,
                    nuclear_norm: f64::NAN,
                    effective_rank: f64::NAN,
                    recon_error: f64::NAN,
                    iters_run: 0,
                    wall_ms: elapsed_ms(start),
                },
            }
        }
    };
    Ok((vec![truth, base], failures))
}

/// Runs one algorithm at one α. Failures keep the last good iterate.
pub fn run_cell(
    cfg: &ExperimentConfig,
    inst: &Instance,
    spec: &AlgorithmSpec,
    alpha: f64,
    snapshot_every: usize,
) -> Result<(Trajectory, Option<String>), AppError> {
    let mut rc = spec.run_config(alpha, cfg.is_square(), cfg.max_iters, cfg.risk_tol)?;
    rc.snapshot_every = snapshot_every;
    let problem = Problem::new(&inst.ens, &inst.y).with_truth(&inst.truth.matrix);
    Ok(match optim::run(&problem, &rc) {
        Ok(traj) => (traj, None),
        Err(fail) => (fail.partial, Some(fail.error.to_string())),
    })
}

fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| a.algorithm.cmp(&b.algorithm).then(b.alpha.total_cmp(&a.alpha)));
}

/// One row per `(alpha, algorithm)` plus the two reference rows, sorted by
/// algorithm and then by decreasing α. Cells run under `schedule`.
pub fn run_alpha_sweep(cfg: &ExperimentConfig, schedule: Schedule) -> Result<SweepOutput, AppError> {
    let inst = Instance::build(cfg)?;
    let (mut rows, mut failures) = reference_rows(&inst)?;

    let cells: Vec<(AlgorithmSpec, f64)> = cfg
        .algorithms
        .iter()
        .flat_map(|spec| cfg.alpha_grid.iter().map(move |&a| (*spec, a)))
        .collect();
    let results = parallel::map(schedule, &cells, |(spec, alpha)| -> Result<(ResultRow, Option<CellFailure>), AppError> {
        let start = Instant::now();
        let (traj, failure) = run_cell(cfg, &inst, spec, *alpha, 0)?;
        let label = spec.name.label();
        let row = row_for(&inst, *alpha, label, &traj.final_iterate, traj.iters_run, elapsed_ms(start))?;
        let failure = failure.map(|message| CellFailure {
            alpha: *alpha,
            algorithm: label.to_string(),
            message,
        });
        Ok((row, failure))
    });
    for r in results {
        let (row, failure) = r?;
        rows.push(row);
        failures.extend(failure);
    }
    sort_rows(&mut rows);
    failures.sort_by(|a, b| a.algorithm.cmp(&b.algorithm).then(b.alpha.total_cmp(&a.alpha)));
    Ok(SweepOutput {
        rows,
        failures,
        mask_fast_path_evals: inst.ens.mask_fast_path_evals(),
    })
}

#[derive(Debug, Clone)]
pub struct SingleRunOutput {
    pub rows: Vec<ResultRow>,
    pub trajectories: Vec<(AlgorithmName, Trajectory)>,
    pub failures: Vec<CellFailure>,
}

/// Every configured algorithm at the single configured α, keeping full
/// trajectories.
pub fn run_single(cfg: &ExperimentConfig, schedule: Schedule) -> Result<SingleRunOutput, AppError> {
    let alpha = *cfg
        .alpha_grid
        .first()
        .ok_or_else(|| AppError::Config("alpha_grid must hold one value".into()))?;
    let inst = Instance::build(cfg)?;
    let results = parallel::map(schedule, &cfg.algorithms, |spec| {
        let start = Instant::now();
        let (traj, failure) = run_cell(cfg, &inst, spec, alpha, cfg.snapshot_every)?;
        let row = row_for(&inst, alpha, spec.name.label(), &traj.final_iterate, traj.iters_run, elapsed_ms(start))?;
        Ok::<_, AppError>((spec.name, traj, row, failure))
    });
    let mut out = SingleRunOutput {
        rows: Vec::new(),
        trajectories: Vec::new(),
        failures: Vec::new(),
    };
    for r in results {
        let (name, traj, row, failure) = r?;
        out.rows.push(row);
        out.trajectories.push((name, traj));
        out.failures.extend(failure.map(|message| CellFailure {
            alpha,
            algorithm: name.label().into(),
            message,
        }));
    }
    sort_rows(&mut out.rows);
    Ok(out)
}
