//! Spectral mirror maps.
//!
//! * Spectral entropy `Φ(X) = tr(X log X − X)` on positive semidefinite
//!   matrices, with `∇Φ = log` and `∇Φ⁻¹ = exp`.
//! * Spectral hypentropy `Φ_β(X) = Σ σᵢ arcsinh(σᵢ/β) − √(σᵢ² + β²)` on
//!   arbitrary rectangular matrices, with `∇Φ_β = U arcsinh(Σ/β) Vᵀ` and
//!   `∇Φ_β⁻¹ = U β sinh(Σ) Vᵀ`.
//!
//! The hypentropy value is evaluated in arcsinh form while its implicit-bias
//! potential uses the logarithmic form; the two agree identically and the
//! tests cross-check them.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::spectral::{self, checked_symmetric, DenseMatrix};

/// Largest spectral argument accepted by `exp`/`sinh` before reporting
/// overflow (double precision overflows near 709).
pub const OVERFLOW_GUARD: f64 = 700.0;

/// Relative eigenvalue floor below which an entropy iterate is treated as
/// having left the open PSD cone.
pub const PD_FLOOR: f64 = 1e-250;

/// Relative clamp for tiny negative eigenvalues of PSD arguments.
pub const PSD_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// General `n x n'` matrices.
    Rectangular,
    /// Square symmetric matrices; iterates are re-symmetrized.
    Symmetric,
    /// Square symmetric positive semidefinite matrices.
    PositiveSemidefinite,
}

impl Domain {
    pub fn is_symmetric(self) -> bool {
        !matches!(self, Domain::Rectangular)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MirrorMap {
    SpectralEntropy,
    SpectralHypentropy { beta: f64, domain: Domain },
}

impl MirrorMap {
    pub fn entropy() -> Self {
        MirrorMap::SpectralEntropy
    }

    /// Hypentropy on rectangular matrices.
    pub fn hypentropy(beta: f64) -> Result<Self> {
        Self::hypentropy_on(beta, Domain::Rectangular)
    }

    pub fn hypentropy_on(beta: f64, domain: Domain) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::ParameterOutOfRange(format!("beta must be positive, got {beta}")));
        }
        if domain == Domain::PositiveSemidefinite {
            return Err(Error::InvalidArgument(
                "hypentropy iterates are not confined to the PSD cone; use Domain::Symmetric".into(),
            ));
        }
        Ok(MirrorMap::SpectralHypentropy { beta, domain })
    }

    pub fn domain(&self) -> Domain {
        match self {
            MirrorMap::SpectralEntropy => Domain::PositiveSemidefinite,
            MirrorMap::SpectralHypentropy { domain, .. } => *domain,
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self {
            MirrorMap::SpectralEntropy => None,
            MirrorMap::SpectralHypentropy { beta, .. } => Some(*beta),
        }
    }

    pub fn value(&self, x: &DenseMatrix) -> Result<f64> {
        match *self {
            MirrorMap::SpectralEntropy => entropy_value(x),
            MirrorMap::SpectralHypentropy { beta, domain } => {
                if domain.is_symmetric() {
                    checked_symmetric(x)?;
                }
                hypentropy_value(x, beta)
            }
        }
    }

    pub fn grad(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        match *self {
            MirrorMap::SpectralEntropy => {
                let eig = spectral::sym_eig(x)?;
                let floor = PD_FLOOR * eig.max_abs_eigenvalue().max(1.0);
                let lowest = eig.min_eigenvalue();
                if !(lowest > floor) {
                    return Err(Error::NotPd {
                        eigenvalue: lowest,
                        floor,
                    });
                }
                eig.lift(f64::ln)
            }
            MirrorMap::SpectralHypentropy { beta, domain } => {
                let f = |s: f64| (s / beta).asinh();
                if domain.is_symmetric() {
                    spectral::lift_sym(x, f)
                } else {
                    spectral::lift_rect(x, f)
                }
            }
        }
    }

    pub fn grad_inverse(&self, z: &DenseMatrix) -> Result<DenseMatrix> {
        self.grad_inverse_spectral(z).map(|(x, _)| x)
    }

    /// `∇Φ⁻¹(Z)` together with the singular values of the result, in
    /// nonincreasing order. The spectrum comes for free from the
    /// decomposition of `Z`.
    pub fn grad_inverse_spectral(&self, z: &DenseMatrix) -> Result<(DenseMatrix, DVector<f64>)> {
        match *self {
            MirrorMap::SpectralEntropy => {
                let eig = spectral::sym_eig(z)?;
                guard(eig.eigenvalues[0])?;
                let values = eig.eigenvalues.map(f64::exp);
                // eigenvalues are descending, so exp preserves the order
                Ok((eig.compose(&values), values))
            }
            MirrorMap::SpectralHypentropy { beta, domain } => {
                if domain.is_symmetric() {
                    let eig = spectral::sym_eig(z)?;
                    guard(eig.max_abs_eigenvalue())?;
                    let values = eig.eigenvalues.map(|l| beta * l.sinh());
                    let mut sv: Vec<f64> = values.iter().map(|v| v.abs()).collect();
                    sv.sort_by(|a, b| b.total_cmp(a));
                    Ok((eig.compose(&values), DVector::from_vec(sv)))
                } else {
                    let dec = spectral::svd(z)?;
                    guard(dec.singulars.amax())?;
                    let values = dec.singulars.map(|s| beta * s.sinh());
                    Ok((dec.compose(&values), values))
                }
            }
        }
    }

    /// `D_Φ(X, Y) = Φ(X) − Φ(Y) − ⟨∇Φ(Y), X − Y⟩`.
    pub fn bregman(&self, x: &DenseMatrix, y: &DenseMatrix) -> Result<f64> {
        if x.shape() != y.shape() {
            return Err(Error::ShapeMismatch {
                expected: y.shape(),
                got: x.shape(),
            });
        }
        let gy = self.grad(y)?;
        Ok(self.value(x)? - self.value(y)? - gy.dot(&(x - y)))
    }
}

fn guard(largest: f64) -> Result<()> {
    if largest > OVERFLOW_GUARD || !largest.is_finite() {
        Err(Error::Overflow { value: largest })
    } else {
        Ok(())
    }
}

/// `Σ σᵢ arcsinh(σᵢ/β) − √(σᵢ² + β²)` over all `min(n, n')` singular values.
pub fn hypentropy_value(x: &DenseMatrix, beta: f64) -> Result<f64> {
    check_param(beta, "beta")?;
    let sv = spectral::singular_values(x)?;
    Ok(sv.iter().map(|&s| s * (s / beta).asinh() - s.hypot(beta)).sum())
}

/// `Σ λᵢ log λᵢ − λᵢ` with `0 log 0 = 0`.
pub fn entropy_value(x: &DenseMatrix) -> Result<f64> {
    let lambda = psd_eigenvalues(x)?;
    Ok(lambda.iter().map(|&l| xlogx(l) - l).sum())
}

/// Implicit-bias potential of hypentropy mirror descent from `X₀ = 0`:
/// `Σ σᵢ log(1/β) + σᵢ log(σᵢ + √(σᵢ² + β²)) − √(σᵢ² + β²)`.
pub fn hypentropy_potential(x: &DenseMatrix, beta: f64) -> Result<f64> {
    check_param(beta, "beta")?;
    let sv = spectral::singular_values(x)?;
    let log_inv_beta = (1.0 / beta).ln();
    Ok(sv
        .iter()
        .map(|&s| {
            let root = s.hypot(beta);
            s * log_inv_beta + s * (s + root).ln() - root
        })
        .sum())
}

/// Implicit-bias potential of entropy mirror descent from `X₀ = αI`:
/// `Σ (log(1/α) − 1) λᵢ + λᵢ log λᵢ`.
pub fn entropy_potential(x: &DenseMatrix, alpha: f64) -> Result<f64> {
    check_param(alpha, "alpha")?;
    let lambda = psd_eigenvalues(x)?;
    let coef = (1.0 / alpha).ln() - 1.0;
    Ok(lambda.iter().map(|&l| coef * l + xlogx(l)).sum())
}

/// Eigenvalues of a PSD matrix with tiny negatives clamped to zero.
pub fn psd_eigenvalues(x: &DenseMatrix) -> Result<DVector<f64>> {
    let eig = spectral::sym_eig(x)?;
    let threshold = -PSD_CLAMP * eig.max_abs_eigenvalue();
    let lowest = eig.min_eigenvalue();
    if lowest < threshold {
        return Err(Error::NotPsd { eigenvalue: lowest });
    }
    Ok(eig.eigenvalues.map(|l| l.max(0.0)))
}

fn xlogx(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * v.ln()
    }
}

fn check_param(v: f64, name: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange(format!("{name} must be positive, got {v}")))
    }
}
