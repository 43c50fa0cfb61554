//! Matrix sensing model: ground truths, measurement ensembles, the empirical
//! risk `f(X) = (1/2m) Σ (⟨Aᵢ, X⟩ − yᵢ)²` and its gradient, and the RIP and
//! coherence diagnostics.
//!
//! Dense ensembles keep all `Aᵢ` stacked as the columns of one
//! `(n·n') x m` matrix, so measuring and forming `∇f` are a pair of
//! matrix-vector products. Symmetric ensembles store only the upper triangle,
//! which halves the memory traffic of both products. Completion ensembles
//! keep only the observed index pairs and evaluate both in `O(m)`.

mod archive;
mod generate;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::parallel::{self, Schedule};
use crate::rng::{gaussian_matrix, stream, Purpose};
use crate::spectral::{self, DenseMatrix};

pub use archive::{read_ensemble, read_ground_truth, write_ensemble, write_ground_truth};
pub use generate::{
    gen_completion, gen_diagonal, gen_gaussian_rect, gen_gaussian_sym, gen_lowrank_psd, gen_lowrank_rect,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    DenseMatrices,
    CompletionMask,
}

#[derive(Debug, Clone)]
enum Operator {
    /// Column `i` is `vec(Aᵢ)` in column-major order.
    Dense { columns: DenseMatrix },
    /// Symmetric `Aᵢ`; column `i` holds the upper triangle of `Aᵢ`, see
    /// [`packed_index`].
    Packed { n: usize, columns: DenseMatrix },
    /// `Aᵢ = e_a e_bᵀ`.
    Mask { indices: Vec<(usize, usize)> },
}

/// Planted low-rank matrix `X*`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub matrix: DenseMatrix,
    pub rank: usize,
    pub psd: bool,
}

/// Measurement vector `yᵢ = ⟨Aᵢ, X*⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    pub y: DVector<f64>,
}

impl Observations {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Linear measurement operator `X ↦ (⟨Aᵢ, X⟩)ᵢ`.
#[derive(Debug)]
pub struct SensingEnsemble {
    shape: (usize, usize),
    op: Operator,
    symmetric: bool,
    seed: Option<u64>,
    mean_sq_spectral: OnceLock<f64>,
    mask_evals: AtomicU64,
}

impl Clone for SensingEnsemble {
    fn clone(&self) -> Self {
        SensingEnsemble {
            shape: self.shape,
            op: self.op.clone(),
            symmetric: self.symmetric,
            seed: self.seed,
            mean_sq_spectral: self.mean_sq_spectral.clone(),
            mask_evals: AtomicU64::new(0),
        }
    }
}

impl SensingEnsemble {
    pub fn from_matrices(matrices: &[DenseMatrix]) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::InvalidArgument("ensemble needs at least one matrix".into()))?;
        let shape = first.shape();
        let mut columns = DenseMatrix::zeros(shape.0 * shape.1, matrices.len());
        let mut symmetric = shape.0 == shape.1;
        for (i, a) in matrices.iter().enumerate() {
            if a.shape() != shape {
                return Err(Error::ShapeMismatch {
                    expected: shape,
                    got: a.shape(),
                });
            }
            spectral::ensure_finite(a, "sensing matrix")?;
            symmetric &= a == &a.transpose();
            columns.column_mut(i).copy_from_slice(a.as_slice());
        }
        Ok(SensingEnsemble::new(shape, Operator::Dense { columns }, symmetric, None))
    }

    pub fn from_indices(shape: (usize, usize), indices: Vec<(usize, usize)>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument("ensemble needs at least one index".into()));
        }
        if let Some(&(a, b)) = indices.iter().find(|&&(a, b)| a >= shape.0 || b >= shape.1) {
            return Err(Error::InvalidArgument(format!(
                "index ({a}, {b}) out of range for {}x{}",
                shape.0, shape.1
            )));
        }
        Ok(SensingEnsemble::new(shape, Operator::Mask { indices }, false, None))
    }

    fn new(shape: (usize, usize), op: Operator, symmetric: bool, seed: Option<u64>) -> Self {
        let op = match op {
            Operator::Dense { columns } if symmetric => Operator::Packed {
                n: shape.0,
                columns: pack_columns(shape.0, &columns),
            },
            op => op,
        };
        SensingEnsemble {
            shape,
            op,
            symmetric,
            seed,
            mean_sq_spectral: OnceLock::new(),
            mask_evals: AtomicU64::new(0),
        }
    }

    pub(crate) fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn kind(&self) -> EnsembleKind {
        match self.op {
            Operator::Dense { .. } | Operator::Packed { .. } => EnsembleKind::DenseMatrices,
            Operator::Mask { .. } => EnsembleKind::CompletionMask,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn m(&self) -> usize {
        match &self.op {
            Operator::Dense { columns } | Operator::Packed { columns, .. } => columns.ncols(),
            Operator::Mask { indices } => indices.len(),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Whether every `Aᵢ` is square and symmetric.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn indices(&self) -> Option<&[(usize, usize)]> {
        match &self.op {
            Operator::Mask { indices } => Some(indices),
            _ => None,
        }
    }

    /// Dense form of `Aᵢ`.
    pub fn matrix(&self, i: usize) -> DenseMatrix {
        let (n, np) = self.shape;
        match &self.op {
            Operator::Dense { columns } => DenseMatrix::from_column_slice(n, np, columns.column(i).as_slice()),
            Operator::Packed { n, columns } => unpack(*n, &columns.column(i).into_owned()),
            Operator::Mask { indices } => {
                let mut a = DenseMatrix::zeros(n, np);
                a[indices[i]] = 1.0;
                a
            }
        }
    }

    pub fn matrices(&self) -> Vec<DenseMatrix> {
        (0..self.m()).map(|i| self.matrix(i)).collect()
    }

    /// Number of measure/adjoint evaluations served by the `O(m)` completion
    /// path since construction.
    pub fn mask_fast_path_evals(&self) -> u64 {
        self.mask_evals.load(Ordering::Relaxed)
    }

    fn check_shape(&self, x: &DenseMatrix) -> Result<()> {
        if x.shape() != self.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape,
                got: x.shape(),
            });
        }
        Ok(())
    }

    fn check_len(&self, y: &Observations) -> Result<()> {
        if y.len() != self.m() {
            return Err(Error::ShapeMismatch {
                expected: (self.m(), 1),
                got: (y.len(), 1),
            });
        }
        Ok(())
    }

    /// `yᵢ = ⟨Aᵢ, X⟩`.
    pub fn measure(&self, x: &DenseMatrix) -> Result<Observations> {
        self.check_shape(x)?;
        let y = match &self.op {
            Operator::Dense { columns } => columns.tr_mul(&DVector::from_column_slice(x.as_slice())),
            Operator::Packed { n, columns } => columns.tr_mul(&pack_folded(*n, x)),
            Operator::Mask { indices } => {
                self.mask_evals.fetch_add(1, Ordering::Relaxed);
                DVector::from_iterator(indices.len(), indices.iter().map(|&ij| x[ij]))
            }
        };
        Ok(Observations { y })
    }

    /// `Σ cᵢ Aᵢ`.
    pub fn adjoint(&self, coeffs: &DVector<f64>) -> Result<DenseMatrix> {
        if coeffs.len() != self.m() {
            return Err(Error::ShapeMismatch {
                expected: (self.m(), 1),
                got: (coeffs.len(), 1),
            });
        }
        let (n, np) = self.shape;
        Ok(match &self.op {
            Operator::Dense { columns } => {
                let v = columns * coeffs;
                DenseMatrix::from_column_slice(n, np, v.as_slice())
            }
            Operator::Packed { n, columns } => unpack(*n, &(columns * coeffs)),
            Operator::Mask { indices } => {
                self.mask_evals.fetch_add(1, Ordering::Relaxed);
                let mut g = DenseMatrix::zeros(n, np);
                for (&ij, c) in indices.iter().zip(coeffs.iter()) {
                    g[ij] += c;
                }
                g
            }
        })
    }

    /// `⟨Aᵢ, X⟩ − yᵢ`.
    pub fn residual(&self, y: &Observations, x: &DenseMatrix) -> Result<DVector<f64>> {
        self.check_len(y)?;
        Ok(self.measure(x)?.y - &y.y)
    }

    pub fn risk(&self, y: &Observations, x: &DenseMatrix) -> Result<f64> {
        let r = self.residual(y, x)?;
        Ok(r.norm_squared() / (2.0 * self.m() as f64))
    }

    /// `∇f(X) = (1/m) Σ (⟨Aᵢ, X⟩ − yᵢ) Aᵢ`.
    pub fn risk_grad(&self, y: &Observations, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.risk_and_grad(y, x).map(|(_, g)| g)
    }

    /// Risk and gradient from a single residual evaluation.
    pub fn risk_and_grad(&self, y: &Observations, x: &DenseMatrix) -> Result<(f64, DenseMatrix)> {
        let r = self.residual(y, x)?;
        let m = self.m() as f64;
        let g = self.adjoint(&(&r / m))?;
        Ok((r.norm_squared() / (2.0 * m), g))
    }

    /// `(1/m) Σ ‖Aᵢ‖₂²`, the smoothness constant of `f` with respect to the
    /// nuclear norm. Computed once per ensemble.
    pub fn mean_sq_spectral_norm(&self) -> Result<f64> {
        if let Some(v) = self.mean_sq_spectral.get() {
            return Ok(*v);
        }
        let v = match &self.op {
            Operator::Mask { .. } => 1.0,
            Operator::Dense { .. } | Operator::Packed { .. } => {
                let mut total = 0.0;
                for i in 0..self.m() {
                    let s = spectral::singular_values(&self.matrix(i))?;
                    total += s[0] * s[0];
                }
                total / self.m() as f64
            }
        };
        Ok(*self.mean_sq_spectral.get_or_init(|| v))
    }

    /// Gram matrix `Gᵢⱼ = ⟨Aᵢ, Aⱼ⟩`.
    pub fn gram(&self) -> DenseMatrix {
        match &self.op {
            Operator::Dense { columns } => columns.tr_mul(columns),
            Operator::Packed { n, columns } => {
                // off-diagonal entries appear twice in ⟨Aᵢ, Aⱼ⟩
                let mut weighted = columns.clone();
                for l in 0..*n {
                    for k in 0..l {
                        weighted.row_mut(packed_index(k, l)).scale_mut(2.0);
                    }
                }
                weighted.tr_mul(columns)
            }
            Operator::Mask { indices } => DenseMatrix::from_fn(indices.len(), indices.len(), |i, j| {
                if indices[i] == indices[j] {
                    1.0
                } else {
                    0.0
                }
            }),
        }
    }

    /// Monte Carlo lower bound on the `(r, δ)` RIP constant.
    ///
    /// Draws `trials` random rank-`r` probes `X = GHᵀ / ‖GHᵀ‖_F` and returns
    /// the largest observed `|((1/m) Σ ⟨Aᵢ, X⟩²)^{1/2} − 1|`. Trial `t` always
    /// uses the same random stream, so a run with more trials sees a superset
    /// of the probes of a run with fewer.
    pub fn rip_estimate(&self, r: usize, trials: usize, seed: u64, schedule: Schedule) -> Result<f64> {
        let (n, np) = self.shape;
        if r == 0 || r > n.min(np) {
            return Err(Error::InvalidRank { r, rows: n, cols: np });
        }
        if trials == 0 {
            return Err(Error::InvalidArgument("rip_estimate needs at least one trial".into()));
        }
        let m = self.m() as f64;
        let probe = |t: usize| -> f64 {
            let mut rng = stream(seed, Purpose::RipProbe, t as u64);
            let g = gaussian_matrix(&mut rng, n, r);
            let h = gaussian_matrix(&mut rng, np, r);
            let x = &g * h.transpose();
            let x = &x / x.norm();
            let y = self.measure(&x).expect("probe has ensemble shape").y;
            ((y.norm_squared() / m).sqrt() - 1.0).abs()
        };
        Ok(parallel::max_range(schedule, trials, 0.0, probe))
    }
}

/// Position of entry `(k, l)`, `k ≤ l`, in the packed upper triangle
/// (column by column).
fn packed_index(k: usize, l: usize) -> usize {
    l * (l + 1) / 2 + k
}

fn pack_columns(n: usize, columns: &DenseMatrix) -> DenseMatrix {
    let mut packed = DenseMatrix::zeros(n * (n + 1) / 2, columns.ncols());
    for l in 0..n {
        for k in 0..=l {
            packed.row_mut(packed_index(k, l)).copy_from(&columns.row(l * n + k));
        }
    }
    packed
}

/// Packed vector `p` with `⟨A, X⟩ = ⟨pack(A), p⟩` for symmetric `A`: diagonal
/// entries of `X` and sums `X_kl + X_lk` above it.
fn pack_folded(n: usize, x: &DenseMatrix) -> DVector<f64> {
    let mut p = DVector::zeros(n * (n + 1) / 2);
    for l in 0..n {
        for k in 0..l {
            p[packed_index(k, l)] = x[(k, l)] + x[(l, k)];
        }
        p[packed_index(l, l)] = x[(l, l)];
    }
    p
}

fn unpack(n: usize, p: &DVector<f64>) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(n, n);
    for l in 0..n {
        for k in 0..=l {
            let v = p[packed_index(k, l)];
            a[(k, l)] = v;
            a[(l, k)] = v;
        }
    }
    a
}

/// `(n/r) max_i ‖P_U eᵢ‖₂²` for an `n x r` basis with orthonormal columns.
pub fn coherence(basis: &DenseMatrix) -> Result<f64> {
    let (n, r) = basis.shape();
    let deviation = (basis.tr_mul(basis) - DenseMatrix::identity(r, r)).norm();
    if !(deviation <= 1e-8) {
        return Err(Error::NotOrthonormal { deviation });
    }
    // ‖P_U eᵢ‖² = ‖Uᵀ eᵢ‖², the squared norm of row i.
    let max_row = basis.row_iter().map(|row| row.norm_squared()).fold(0.0, f64::max);
    Ok(n as f64 / r as f64 * max_row)
}
