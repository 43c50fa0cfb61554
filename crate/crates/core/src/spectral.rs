//! Dense spectral calculus: symmetric eigendecomposition, SVD, and lifting of
//! scalar functions to matrices through their spectra.
//!
//! Every matrix function in the crate goes through a full decomposition. The
//! matrices involved are small (at most a few hundred rows) and the same
//! decomposition also yields the spectra that potentials and diagnostics need.
//!
//! Singular vectors and eigenvectors are not normalized for sign or for order
//! within degenerate clusters; only spectrally invariant quantities should be
//! derived from them.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Real dense matrix, the universal value type of the crate.
pub type DenseMatrix = DMatrix<f64>;

const MAX_SWEEPS_PER_DIM: usize = 10_000;

/// Eigendecomposition `S = Q diag(λ) Qᵀ` with eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DenseMatrix,
}

/// Thin singular value decomposition `X = U diag(σ) Vᵀ`, `σ` nonincreasing.
///
/// `left` is `rows x k`, `right` is `cols x k` with `k = min(rows, cols)`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub left: DenseMatrix,
    pub singulars: DVector<f64>,
    pub right: DenseMatrix,
    /// Eigendecomposition of `[[0, X], [Xᵀ, 0]]` when the factors were read
    /// off it; `compose` then works from the eigenvectors directly.
    jordan: Option<SymEig>,
}

impl SymEig {
    /// `Q diag(values) Qᵀ`, symmetrized.
    pub fn compose(&self, values: &DVector<f64>) -> DenseMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*v);
        }
        symmetrize(&(scaled * self.eigenvectors.transpose()))
    }

    /// Applies `f` to the eigenvalues and recomposes.
    pub fn lift(&self, f: impl Fn(f64) -> f64) -> Result<DenseMatrix> {
        let values = map_spectrum(&self.eigenvalues, f)?;
        Ok(self.compose(&values))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.amax()
    }
}

impl Svd {
    /// `U diag(values) Vᵀ`. For factors taken from the symmetric embedding
    /// this is the off-diagonal block of the odd lift `Σ vᵢ(wᵢ⁺wᵢ⁺ᵀ − wᵢ⁻wᵢ⁻ᵀ)`,
    /// which stays accurate when singular values cluster near zero.
    pub fn compose(&self, values: &DVector<f64>) -> DenseMatrix {
        match &self.jordan {
            None => {
                let mut scaled = self.left.clone();
                for (j, v) in values.iter().enumerate() {
                    scaled.column_mut(j).scale_mut(*v);
                }
                scaled * self.right.transpose()
            }
            Some(eig) => {
                let (n, np) = (self.left.nrows(), self.right.nrows());
                let total = n + np;
                let mut top = eig.eigenvectors.rows(0, n).into_owned();
                let mut weights = DVector::zeros(total);
                for (i, &v) in values.iter().enumerate() {
                    weights[i] = v;
                    weights[total - 1 - i] = -v;
                }
                for (j, w) in weights.iter().enumerate() {
                    top.column_mut(j).scale_mut(*w);
                }
                top * eig.eigenvectors.rows(n, np).transpose()
            }
        }
    }

    pub fn lift(&self, f: impl Fn(f64) -> f64) -> Result<DenseMatrix> {
        let values = map_spectrum(&self.singulars, f)?;
        Ok(self.compose(&values))
    }
}

fn map_spectrum(values: &DVector<f64>, f: impl Fn(f64) -> f64) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(values.len());
    for (i, &v) in values.iter().enumerate() {
        let fv = f(v);
        if !fv.is_finite() {
            return Err(Error::DomainError { value: v });
        }
        out[i] = fv;
    }
    Ok(out)
}

pub fn ensure_finite(m: &DenseMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn ensure_square(m: &DenseMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// `(S + Sᵀ) / 2`.
pub fn symmetrize(s: &DenseMatrix) -> DenseMatrix {
    (s + s.transpose()) * 0.5
}

/// `‖S − Sᵀ‖_F`.
pub fn asymmetry(s: &DenseMatrix) -> f64 {
    (s - s.transpose()).norm()
}

/// Validates near-symmetry and returns the symmetrized matrix.
pub fn checked_symmetric(s: &DenseMatrix) -> Result<DenseMatrix> {
    ensure_square(s)?;
    ensure_finite(s, "symmetric input")?;
    let asym = asymmetry(s);
    let tolerance = 1e-8 * s.norm().max(1.0);
    if asym > tolerance {
        return Err(Error::AsymmetricInput {
            asymmetry: asym,
            tolerance,
        });
    }
    Ok(symmetrize(s))
}

/// Symmetric eigendecomposition; eigenvalues descending.
pub fn sym_eig(s: &DenseMatrix) -> Result<SymEig> {
    let sym = checked_symmetric(s)?;
    let n = sym.nrows();
    let eig = nalgebra::SymmetricEigen::try_new(sym, f64::EPSILON, MAX_SWEEPS_PER_DIM * n)
        .ok_or(Error::NumericalFailure("symmetric eigendecomposition did not converge"))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let eigenvectors = DenseMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok(SymEig {
        eigenvalues,
        eigenvectors,
    })
}

/// `[[0, X], [Xᵀ, 0]]`, whose eigenvalues are `±σᵢ(X)` padded with zeros.
fn jordan_embedding(x: &DenseMatrix) -> DenseMatrix {
    let (n, np) = x.shape();
    let mut j = DenseMatrix::zeros(n + np, n + np);
    j.view_mut((0, n), (n, np)).copy_from(x);
    j.view_mut((n, 0), (np, n)).copy_from(&x.transpose());
    j
}

fn is_exactly_symmetric(x: &DenseMatrix) -> bool {
    x.is_square() && (0..x.nrows()).all(|i| (0..i).all(|j| x[(i, j)] == x[(j, i)]))
}

fn unit_or_zero(v: DVector<f64>) -> DVector<f64> {
    let norm = v.norm();
    if norm > 0.0 {
        v / norm
    } else {
        v
    }
}

/// Thin SVD with nonincreasing singular values.
///
/// Built on symmetric eigendecompositions: of `X` itself when it is
/// symmetric, otherwise of `[[0, X], [Xᵀ, 0]]`. Singular vectors belonging
/// to zero singular values are arbitrary and may not be orthonormal.
pub fn svd(x: &DenseMatrix) -> Result<Svd> {
    ensure_finite(x, "svd input")?;
    let (n, np) = x.shape();
    if is_exactly_symmetric(x) {
        let eig = sym_eig(x)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));
        let singulars = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i].abs()));
        let left = DenseMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
        let right = DenseMatrix::from_columns(
            &order
                .iter()
                .map(|&i| eig.eigenvectors.column(i) * if eig.eigenvalues[i] < 0.0 { -1.0 } else { 1.0 })
                .collect::<Vec<_>>(),
        );
        return Ok(Svd {
            left,
            singulars,
            right,
            jordan: None,
        });
    }
    let k = n.min(np);
    let eig = sym_eig(&jordan_embedding(x))?;
    let singulars = DVector::from_iterator(k, eig.eigenvalues.iter().take(k).map(|v| v.max(0.0)));
    let left = DenseMatrix::from_columns(&(0..k).map(|i| unit_or_zero(eig.eigenvectors.column(i).rows(0, n).into_owned())).collect::<Vec<_>>());
    let right = DenseMatrix::from_columns(&(0..k).map(|i| unit_or_zero(eig.eigenvectors.column(i).rows(n, np).into_owned())).collect::<Vec<_>>());
    Ok(Svd {
        left,
        singulars,
        right,
        jordan: Some(eig),
    })
}

/// Singular values only, nonincreasing.
pub fn singular_values(x: &DenseMatrix) -> Result<DVector<f64>> {
    ensure_finite(x, "svd input")?;
    let (symmetric, k) = (is_exactly_symmetric(x), x.nrows().min(x.ncols()));
    let values = if symmetric { x.symmetric_eigenvalues() } else { jordan_embedding(x).symmetric_eigenvalues() };
    let mut s: Vec<f64> = values.iter().map(|v| if symmetric { v.abs() } else { *v }).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.truncate(k);
    Ok(DVector::from_iterator(k, s.into_iter().map(|v| v.max(0.0))))
}

/// `Q diag(f(λ)) Qᵀ` for symmetric `S`.
pub fn lift_sym(s: &DenseMatrix, f: impl Fn(f64) -> f64) -> Result<DenseMatrix> {
    sym_eig(s)?.lift(f)
}

/// `U diag(f(σ)) Vᵀ`; requires `f(0) = 0` so the thin/full ambiguity of the
/// SVD does not matter.
pub fn lift_rect(x: &DenseMatrix, f: impl Fn(f64) -> f64) -> Result<DenseMatrix> {
    if f(0.0) != 0.0 {
        return Err(Error::DomainError { value: 0.0 });
    }
    svd(x)?.lift(f)
}
