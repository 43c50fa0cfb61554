//! Nuclear-norm minimization baseline `argmin {‖X‖_* : A(X) = y}`, optionally
//! restricted to the PSD cone, solved by consensus ADMM:
//!
//! ```text
//! X ← prox_{‖·‖_*/ρ}(Z − U)     (singular value or eigenvalue shrinkage)
//! Z ← Π_{A(Z) = y}(X + U)
//! U ← U + X − Z
//! ```
//!
//! The returned matrix is the `Z` iterate, which satisfies the measurements
//! to machine precision.

use nalgebra::{Cholesky, DVector, Dyn};

use crate::error::{Error, Result};
use crate::sensing::{EnsembleKind, Observations, SensingEnsemble};
use crate::spectral::{self, symmetrize, DenseMatrix};

/// Ridge added to a rank-deficient Gram matrix.
pub const GRAM_RIDGE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NucminConfig {
    pub penalty: f64,
    pub max_iters: usize,
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub psd: bool,
}

impl Default for NucminConfig {
    fn default() -> Self {
        NucminConfig {
            penalty: 1.0,
            max_iters: 20_000,
            primal_tol: 1e-9,
            dual_tol: 1e-9,
            psd: false,
        }
    }
}

impl NucminConfig {
    pub fn psd() -> Self {
        NucminConfig {
            psd: true,
            ..Self::default()
        }
    }
}

/// `U max(Σ − τ, 0) Vᵀ`.
pub fn svt_prox(x: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    check_tau(tau)?;
    let dec = spectral::svd(x)?;
    Ok(dec.compose(&dec.singulars.map(|s| (s - tau).max(0.0))))
}

/// Prox of `τ tr(X) + ι_{X ⪰ 0}` on symmetric matrices: `Q max(Λ − τ, 0) Qᵀ`.
pub fn psd_prox(s: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    check_tau(tau)?;
    let eig = spectral::sym_eig(&symmetrize(s))?;
    Ok(eig.compose(&eig.eigenvalues.map(|l| (l - tau).max(0.0))))
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("threshold must be positive, got {tau}")));
    }
    Ok(())
}

enum Projection {
    /// Gram matrix of the (possibly symmetrized) measurement matrices.
    Dense {
        columns: DenseMatrix,
        gram: Cholesky<f64, Dyn>,
    },
    Mask {
        indices: Vec<(usize, usize)>,
        mirror: bool,
    },
}

/// Euclidean projection onto `{Z : A(Z) = y}`, with the Gram matrix factored
/// once.
pub struct AffineProjector {
    shape: (usize, usize),
    proj: Projection,
    ridge_applied: bool,
}

impl AffineProjector {
    pub fn new(ens: &SensingEnsemble) -> Result<Self> {
        Self::build(ens, false)
    }

    /// Projection within the symmetric matrices. A constraint `⟨Aᵢ, Z⟩ = yᵢ`
    /// on symmetric `Z` only sees `sym(Aᵢ)`, so for completion it fixes the
    /// observed entry and its mirror image.
    pub fn symmetric(ens: &SensingEnsemble) -> Result<Self> {
        let (n, np) = ens.shape();
        if n != np {
            return Err(Error::NonSquare { rows: n, cols: np });
        }
        Self::build(ens, true)
    }

    fn build(ens: &SensingEnsemble, symmetric: bool) -> Result<Self> {
        let shape = ens.shape();
        if ens.kind() == EnsembleKind::CompletionMask {
            let indices = ens.indices().expect("completion ensemble has indices").to_vec();
            return Ok(AffineProjector {
                shape,
                proj: Projection::Mask {
                    indices,
                    mirror: symmetric,
                },
                ridge_applied: false,
            });
        }
        let mut columns = DenseMatrix::zeros(shape.0 * shape.1, ens.m());
        for i in 0..ens.m() {
            let mut a = ens.matrix(i);
            if symmetric {
                a = symmetrize(&a);
            }
            columns.column_mut(i).copy_from_slice(a.as_slice());
        }
        let gram = columns.tr_mul(&columns);
        let (gram, ridge_applied) = factor(gram)?;
        Ok(AffineProjector {
            shape,
            proj: Projection::Dense { columns, gram },
            ridge_applied,
        })
    }

    /// True when the Gram matrix was rank deficient and regularized.
    pub fn ridge_applied(&self) -> bool {
        self.ridge_applied
    }

    /// `X − A*(G⁻¹(A(X) − y))`.
    pub fn project(&self, y: &Observations, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.shape() != self.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape,
                got: x.shape(),
            });
        }
        match &self.proj {
            Projection::Dense { columns, gram } => {
                check_len(y, columns.ncols())?;
                let v = DVector::from_column_slice(x.as_slice());
                let coeffs = gram.solve(&(columns.tr_mul(&v) - &y.y));
                let out = v - columns * coeffs;
                Ok(DenseMatrix::from_column_slice(self.shape.0, self.shape.1, out.as_slice()))
            }
            Projection::Mask { indices, mirror } => {
                check_len(y, indices.len())?;
                let mut out = x.clone();
                for (&(a, b), &v) in indices.iter().zip(y.y.iter()) {
                    out[(a, b)] = v;
                    if *mirror {
                        out[(b, a)] = v;
                    }
                }
                Ok(out)
            }
        }
    }
}

fn check_len(y: &Observations, m: usize) -> Result<()> {
    if y.len() != m {
        return Err(Error::ShapeMismatch {
            expected: (m, 1),
            got: (y.len(), 1),
        });
    }
    Ok(())
}

/// Cholesky factor of `gram`, or of `gram + ridge·I` when it is numerically
/// singular.
fn factor(gram: DenseMatrix) -> Result<(Cholesky<f64, Dyn>, bool)> {
    if let Some(chol) = Cholesky::new(gram.clone()) {
        let pivots = chol.l_dirty().diagonal().map(|d| d * d);
        if pivots.min() > 1e-12 * pivots.max() {
            return Ok((chol, false));
        }
    }
    let m = gram.nrows();
    Cholesky::new(gram + DenseMatrix::identity(m, m) * GRAM_RIDGE)
        .map(|c| (c, true))
        .ok_or(Error::NumericalFailure("Gram matrix could not be factored"))
}

/// Projection onto the measurement-consistent set.
pub fn affine_project(ens: &SensingEnsemble, y: &Observations, x: &DenseMatrix) -> Result<DenseMatrix> {
    AffineProjector::new(ens)?.project(y, x)
}

#[derive(Debug, Clone)]
pub struct NucminOutput {
    pub matrix: DenseMatrix,
    pub iters: usize,
    /// `‖X − Z‖_F` at the returned iterate.
    pub primal_residual: f64,
    /// `ρ‖Z − Z_prev‖_F` at the returned iterate.
    pub dual_residual: f64,
    pub ridge_applied: bool,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("{error}")]
pub struct NucminFailure {
    pub error: Error,
    /// Iterate with the smallest combined residual, when any iteration ran.
    pub best: Option<NucminOutput>,
}

impl From<Error> for NucminFailure {
    fn from(error: Error) -> Self {
        NucminFailure { error, best: None }
    }
}

pub fn nucmin(ens: &SensingEnsemble, y: &Observations, cfg: &NucminConfig) -> std::result::Result<NucminOutput, NucminFailure> {
    if !(cfg.penalty > 0.0 && cfg.primal_tol > 0.0 && cfg.dual_tol > 0.0) || cfg.max_iters == 0 {
        return Err(Error::InvalidArgument(format!("invalid nucmin configuration {cfg:?}")).into());
    }
    let projector = if cfg.psd {
        AffineProjector::symmetric(ens)?
    } else {
        AffineProjector::new(ens)?
    };
    let (n, np) = ens.shape();
    let tau = 1.0 / cfg.penalty;
    let mut z = projector.project(y, &DenseMatrix::zeros(n, np))?;
    let mut u = DenseMatrix::zeros(n, np);
    let mut best: Option<NucminOutput> = None;

    for k in 1..=cfg.max_iters {
        let v = &z - &u;
        let x = if cfg.psd { psd_prox(&v, tau)? } else { svt_prox(&v, tau)? };
        let z_next = projector.project(y, &(&x + &u))?;
        let primal = (&x - &z_next).norm();
        let dual = cfg.penalty * (&z_next - &z).norm();
        u += &x - &z_next;
        z = if cfg.psd { symmetrize(&z_next) } else { z_next };

        let out = NucminOutput {
            matrix: z.clone(),
            iters: k,
            primal_residual: primal,
            dual_residual: dual,
            ridge_applied: projector.ridge_applied(),
        };
        if primal <= cfg.primal_tol && dual <= cfg.dual_tol {
            return Ok(out);
        }
        if best.as_ref().is_none_or(|b| primal + dual < b.primal_residual + b.dual_residual) {
            best = Some(out);
        }
    }
    let (primal, dual) = best.as_ref().map_or((f64::NAN, f64::NAN), |b| (b.primal_residual, b.dual_residual));
    Err(NucminFailure {
        error: Error::MaxItersExceeded {
            iters: cfg.max_iters,
            primal,
            dual,
        },
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::nuclear_norm;
    use crate::rng::{gaussian_matrix, stream, Purpose};
    use crate::sensing::{gen_completion, gen_gaussian_rect, gen_gaussian_sym, gen_lowrank_psd, gen_lowrank_rect};

    fn random(seed: u64, rows: usize, cols: usize) -> DenseMatrix {
        gaussian_matrix(&mut stream(seed, Purpose::Suite, 0), rows, cols)
    }

    fn diag(values: &[f64]) -> DenseMatrix {
        DenseMatrix::from_diagonal(&DVector::from_column_slice(values))
    }

    #[test]
    fn svt_examples() {
        let x = random(1, 3, 4);
        let top = spectral::singular_values(&x).unwrap()[0];
        assert_eq!(svt_prox(&x, top).unwrap().norm(), 0.0);
        assert_eq!(svt_prox(&x, 2.0 * top).unwrap().norm(), 0.0);
        let out = svt_prox(&diag(&[3.0, 1.0]), 1.0).unwrap();
        assert!((out - diag(&[2.0, 0.0])).norm() < 1e-14);
        assert!(svt_prox(&x, 0.0).is_err());
    }

    #[test]
    fn svt_is_the_proximal_point() {
        let x = random(2, 4, 5);
        let tau = 0.8;
        let z = svt_prox(&x, tau).unwrap();
        let objective = |m: &DenseMatrix| tau * nuclear_norm(m).unwrap() + 0.5 * (m - &x).norm_squared();
        let best = objective(&z);
        let mut rng = stream(3, Purpose::Suite, 0);
        for k in 0..1000 {
            let scale = 10f64.powi(-(k % 4) - 1);
            let p = &z + gaussian_matrix(&mut rng, 4, 5) * scale;
            assert!(objective(&p) >= best - 1e-12);
        }
    }

    #[test]
    fn psd_prox_clips_eigenvalues() {
        let out = psd_prox(&diag(&[2.0, 0.5, -1.0]), 1.0).unwrap();
        assert!((out - diag(&[1.0, 0.0, 0.0])).norm() < 1e-14);
    }

    #[test]
    fn feasible_points_are_fixed() {
        let ens = gen_gaussian_rect(4, 5, 8, 4).unwrap();
        let x = random(5, 4, 5);
        let y = ens.measure(&x).unwrap();
        assert!((affine_project(&ens, &y, &x).unwrap() - &x).norm() <= 1e-10);
    }

    #[test]
    fn mask_projection_overwrites_entries() {
        let ens = gen_completion(4, 5, 7, 6, false).unwrap();
        let x = random(7, 4, 5);
        let y = Observations {
            y: DVector::from_fn(7, |i, _| i as f64),
        };
        let out = affine_project(&ens, &y, &x).unwrap();
        let idx = ens.indices().unwrap();
        for a in 0..4 {
            for b in 0..5 {
                match idx.iter().position(|&p| p == (a, b)) {
                    Some(i) => assert_eq!(out[(a, b)], i as f64),
                    None => assert_eq!(out[(a, b)], x[(a, b)]),
                }
            }
        }
    }

    #[test]
    fn projection_is_feasible_and_closest() {
        let ens = gen_gaussian_rect(4, 5, 8, 8).unwrap();
        let y = ens.measure(&random(9, 4, 5)).unwrap();
        let x = random(10, 4, 5);
        let projector = AffineProjector::new(&ens).unwrap();
        assert!(!projector.ridge_applied());
        let p = projector.project(&y, &x).unwrap();
        assert!((ens.measure(&p).unwrap().y - &y.y).amax() <= 1e-8);
        let dist = (&p - &x).norm();
        // feasible perturbations p + N, N in the null space
        let zero = Observations { y: DVector::zeros(8) };
        for seed in 0..200 {
            let n = projector.project(&zero, &random(100 + seed, 4, 5)).unwrap();
            let other = &p + n * 0.3;
            assert!((ens.measure(&other).unwrap().y - &y.y).amax() <= 1e-8);
            assert!((&other - &x).norm() >= dist - 1e-12);
        }
    }

    #[test]
    fn duplicate_measurements_trigger_the_ridge() {
        let a = random(11, 3, 3);
        let ens = SensingEnsemble::from_matrices(&[a.clone(), a.clone(), random(12, 3, 3)]).unwrap();
        let xs = random(13, 3, 3);
        let y = ens.measure(&xs).unwrap();
        let projector = AffineProjector::new(&ens).unwrap();
        assert!(projector.ridge_applied());
        let p = projector.project(&y, &DenseMatrix::zeros(3, 3)).unwrap();
        assert!((ens.measure(&p).unwrap().y - &y.y).amax() <= 1e-6);
    }

    #[test]
    fn fully_observed_completion_returns_the_truth() {
        let gt = gen_lowrank_rect(4, 5, 2, 14).unwrap();
        let ens = gen_completion(4, 5, 20, 14, false).unwrap();
        let y = ens.measure(&gt.matrix).unwrap();
        let out = nucmin(&ens, &y, &NucminConfig::default()).unwrap();
        assert!((out.matrix - &gt.matrix).norm() <= 1e-10);
    }

    #[test]
    fn two_by_two_completion() {
        let ens = SensingEnsemble::from_indices((2, 2), vec![(0, 0), (0, 1), (1, 0)]).unwrap();
        let y = Observations {
            y: DVector::from_element(3, 1.0),
        };
        let out = nucmin(&ens, &y, &NucminConfig::default()).unwrap();
        // grid search over the free entry
        let grid_best = (0..=4000)
            .map(|k| -1.0 + k as f64 * 1e-3)
            .map(|v| (v, nuclear_norm(&DenseMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, v])).unwrap()))
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        assert!((grid_best.0 - 1.0).abs() <= 1e-3);
        assert!((out.matrix[(1, 1)] - 1.0).abs() <= 1e-4, "{}", out.matrix[(1, 1)]);
    }

    #[test]
    fn output_is_feasible_and_no_worse_than_other_solutions() {
        let gt = gen_lowrank_rect(5, 6, 1, 15).unwrap();
        let ens = gen_gaussian_rect(5, 6, 20, 15).unwrap();
        let y = ens.measure(&gt.matrix).unwrap();
        let cfg = NucminConfig::default();
        let out = nucmin(&ens, &y, &cfg).unwrap();
        assert!(ens.risk(&y, &out.matrix).unwrap() <= cfg.primal_tol.powi(2));
        let best = nuclear_norm(&out.matrix).unwrap();
        assert!(best <= nuclear_norm(&gt.matrix).unwrap() + 1e-6);
        let projector = AffineProjector::new(&ens).unwrap();
        for seed in 0..20 {
            let z = projector.project(&y, &random(200 + seed, 5, 6)).unwrap();
            assert!(best <= nuclear_norm(&z).unwrap() + 1e-6);
        }
    }

    #[test]
    fn psd_mode_stays_in_the_cone() {
        let gt = gen_lowrank_psd(5, 1, 16).unwrap();
        let ens = gen_gaussian_sym(5, 10, 16).unwrap();
        let y = ens.measure(&gt.matrix).unwrap();
        let cfg = NucminConfig::psd();
        let out = nucmin(&ens, &y, &cfg).unwrap();
        assert!(spectral::sym_eig(&out.matrix).unwrap().min_eigenvalue() >= -1e-8);
        assert!(ens.risk(&y, &out.matrix).unwrap() <= cfg.primal_tol.powi(2));
        assert!(nuclear_norm(&out.matrix).unwrap() <= nuclear_norm(&gt.matrix).unwrap() + 1e-6);

        // completion in PSD mode keeps observed entries and their mirrors
        let ens = gen_completion(5, 5, 15, 17, false).unwrap();
        let y = ens.measure(&gt.matrix).unwrap();
        let out = nucmin(&ens, &y, &cfg).unwrap();
        for (&(a, b), v) in ens.indices().unwrap().iter().zip(y.y.iter()) {
            assert!((out.matrix[(a, b)] - v).abs() <= 1e-9);
            assert!((out.matrix[(b, a)] - v).abs() <= 1e-9);
        }
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let gt = gen_lowrank_rect(5, 6, 1, 18).unwrap();
        let ens = gen_gaussian_rect(5, 6, 20, 18).unwrap();
        let y = ens.measure(&gt.matrix).unwrap();
        let cfg = NucminConfig {
            max_iters: 3,
            ..NucminConfig::default()
        };
        let err = nucmin(&ens, &y, &cfg).unwrap_err();
        assert!(matches!(err.error, Error::MaxItersExceeded { iters: 3, .. }));
        let best = err.best.unwrap();
        assert!(ens.risk(&y, &best.matrix).unwrap() < 1e-20);
    }
}
