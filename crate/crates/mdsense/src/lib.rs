//! Experiment harness for mirror-descent matrix sensing: α-sweeps comparing
//! mirror descent, gradient descent and the nuclear-norm baseline, single
//! runs with full trajectories, an invariant suite and recovery-bound
//! reports.

pub mod bounds;
pub mod config;
pub mod output;
pub mod suite;
pub mod svg;
pub mod sweep;

use mdsense_core::sensing::{gen_completion, gen_gaussian_rect, gen_gaussian_sym, gen_lowrank_psd, gen_lowrank_rect};
use mdsense_core::{GroundTruth, Observations, SensingEnsemble};

use config::{EnsembleSpec, ExperimentConfig};

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(#[from] mdsense_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0} invariant(s) failed")]
    InvariantFailure(usize),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::InvariantFailure(_) => 1,
            AppError::Config(_) => 2,
            AppError::Runtime(_) | AppError::Io(_) | AppError::Csv(_) => 3,
        }
    }
}

/// The planted matrix, the ensemble and its measurements for a config.
#[derive(Debug, Clone)]
pub struct Instance {
    pub truth: GroundTruth,
    pub ens: SensingEnsemble,
    pub y: Observations,
}

impl Instance {
    /// Square problems get a PSD ground truth, rectangular ones a general
    /// rank-`r` matrix. Everything is drawn from `cfg.seed`.
    pub fn build(cfg: &ExperimentConfig) -> Result<Self, AppError> {
        let truth = if cfg.is_square() {
            gen_lowrank_psd(cfg.n, cfg.r, cfg.seed)?
        } else {
            gen_lowrank_rect(cfg.n, cfg.nprime, cfg.r, cfg.seed)?
        };
        let ens = match cfg.ensemble {
            EnsembleSpec::GaussianSym => gen_gaussian_sym(cfg.n, cfg.m, cfg.seed)?,
            EnsembleSpec::GaussianRect => gen_gaussian_rect(cfg.n, cfg.nprime, cfg.m, cfg.seed)?,
            EnsembleSpec::Completion => gen_completion(cfg.n, cfg.nprime, cfg.m, cfg.seed, false)?,
        };
        let y = ens.measure(&truth.matrix)?;
        Ok(Instance { truth, ens, y })
    }
}
