//! Recovery-bound report for a configured instance.

use mdsense_core::metrics::{self, theorem3_bound, theorem4_bound, Bound, BoundInputs};
use mdsense_core::parallel::Schedule;
use mdsense_core::sensing::coherence;
use mdsense_core::{spectral, DenseMatrix};
use serde::Serialize;

use crate::config::{EnsembleSpec, ExperimentConfig};
use crate::{AppError, Instance};

/// Incoherence parameters of a rank-`r` matrix: `μ₀` is the larger
/// coherence of its column and row spaces, `μ₁` the largest entry of `UVᵀ`
/// in units of `√(r/(nn'))`.
pub fn incoherence(x: &DenseMatrix, r: usize) -> Result<(f64, f64), AppError> {
    let dec = spectral::svd(x)?;
    let u = dec.left.columns(0, r).into_owned();
    let v = dec.right.columns(0, r).into_owned();
    let mu0 = coherence(&u)?.max(coherence(&v)?);
    let (n, np) = x.shape();
    let mu1 = (&u * v.transpose()).amax() / (r as f64 / (n * np) as f64).sqrt();
    Ok((mu0, mu1))
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceSummary {
    pub nuclear_star: f64,
    pub mu0: f64,
    pub mu1: f64,
    pub delta: f64,
    /// `(rank, estimate)` of the RIP constant at rank `min(5r, n, n')`;
    /// Gaussian ensembles only.
    pub rip: Option<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundValue {
    /// `None` stands for an infinite (vacuous) bound.
    pub value: Option<f64>,
    pub valid: bool,
}

impl From<Bound> for BoundValue {
    fn from(b: Bound) -> Self {
        BoundValue {
            value: b.value.is_finite().then_some(b.value),
            valid: b.valid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompletionValue {
    pub bound: BoundValue,
    pub sample_requirement: u64,
    pub meets_requirement: bool,
    pub probability: f64,
    pub probability_vacuous: bool,
}

impl From<metrics::MatrixCompletionBound> for CompletionValue {
    fn from(b: metrics::MatrixCompletionBound) -> Self {
        CompletionValue {
            bound: b.bound.into(),
            sample_requirement: b.sample_requirement,
            meets_requirement: b.meets_requirement,
            probability: b.probability,
            probability_vacuous: b.probability_vacuous,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundLine {
    pub alpha: f64,
    /// `entropy` for the PSD form with `X₀ = αI`, `hypentropy` for `β = α`.
    pub form: &'static str,
    pub theorem3: Option<BoundValue>,
    pub theorem4: Option<CompletionValue>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub instance: InstanceSummary,
    pub lines: Vec<BoundLine>,
}

pub fn bounds_report(cfg: &ExperimentConfig, schedule: Schedule) -> Result<BoundsReport, AppError> {
    let inst = Instance::build(cfg)?;
    let nuclear_star = metrics::nuclear_norm(&inst.truth.matrix)?;
    let (mu0, mu1) = incoherence(&inst.truth.matrix, cfg.r)?;
    let completion = cfg.ensemble == EnsembleSpec::Completion;
    let rip = if completion {
        None
    } else {
        let rank = (5 * cfg.r).min(cfg.n).min(cfg.nprime);
        Some((rank, inst.ens.rip_estimate(rank, cfg.rip_trials, cfg.seed, schedule)?))
    };
    let forms: &[(&str, bool)] = if inst.truth.psd { &[("entropy", true), ("hypentropy", false)] } else { &[("hypentropy", false)] };

    let mut lines = Vec::new();
    for &alpha in &cfg.alpha_grid {
        for &(form, psd_form) in forms {
            let inputs = BoundInputs {
                nuclear_star,
                n: cfg.n,
                nprime: cfg.nprime,
                r: cfg.r,
                delta: cfg.delta,
                scale: alpha,
                m: cfg.m,
                c: cfg.c,
                mu0,
                mu1,
            };
            let outcome = if completion {
                theorem4_bound(&inputs, psd_form).map(|b| (None, Some(b.into())))
            } else {
                theorem3_bound(&inputs, psd_form).map(|b| (Some(b.into()), None))
            };
            lines.push(match outcome {
                Ok((theorem3, theorem4)) => BoundLine {
                    alpha,
                    form,
                    theorem3,
                    theorem4,
                    error: None,
                },
                Err(e) => BoundLine {
                    alpha,
                    form,
                    theorem3: None,
                    theorem4: None,
                    error: Some(e.to_string()),
                },
            });
        }
    }
    Ok(BoundsReport {
        instance: InstanceSummary {
            nuclear_star,
            mu0,
            mu1,
            delta: cfg.delta,
            rip,
        },
        lines,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incoherence_of_a_spike_and_a_flat_matrix() {
        let mut spike = DenseMatrix::zeros(4, 4);
        spike[(0, 0)] = 1.0;
        let (mu0, mu1) = incoherence(&spike, 1).unwrap();
        assert!((mu0 - 4.0).abs() < 1e-12);
        assert!((mu1 - 4.0).abs() < 1e-12);

        let flat = DenseMatrix::from_element(4, 6, 1.0);
        let (mu0, mu1) = incoherence(&flat, 1).unwrap();
        assert!((mu0 - 1.0).abs() < 1e-12, "{mu0}");
        assert!((mu1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_covers_each_alpha_and_form() {
        let cfg: ExperimentConfig = "experiment = alpha-sweep\nn = 8\nr = 1\nm = 48\nensemble = gaussian-sym\n\
             algorithms = md-entropy:1\nalpha_grid = 1e-1, 1e-8\nseed = 2\nrip_trials = 200\n"
            .parse()
            .unwrap();
        let report = bounds_report(&cfg, Schedule::Sequential).unwrap();
        assert_eq!(report.lines.len(), 4);
        assert!((report.instance.nuclear_star - 1.0).abs() < 1e-12);
        assert_eq!(report.instance.rip.unwrap().0, 5);
        // 1e-1 exceeds both scale limits for n = 8
        assert!(report.lines[..2].iter().all(|l| l.error.is_some()));
        assert!(report.lines[2..].iter().all(|l| l.theorem3.is_some() && l.error.is_none()));
    }

    #[test]
    fn completion_reports_the_sampling_bound() {
        let cfg: ExperimentConfig = "experiment = alpha-sweep\nn = 6\nnprime = 7\nr = 1\nm = 30\nensemble = completion\n\
             algorithms = md-hypentropy:1\nalpha_grid = 1e-6\nseed = 2\n"
            .parse()
            .unwrap();
        let report = bounds_report(&cfg, Schedule::Sequential).unwrap();
        assert!(report.instance.rip.is_none());
        assert_eq!(report.lines.len(), 1);
        let b = report.lines[0].theorem4.as_ref().unwrap();
        assert!(!b.meets_requirement);
    }
}
