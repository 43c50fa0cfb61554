//! Norms, effective rank and the closed-form recovery bounds.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::spectral::{self, DenseMatrix};

pub fn nuclear_norm(x: &DenseMatrix) -> Result<f64> {
    Ok(spectral::singular_values(x)?.sum())
}

pub fn frobenius_norm(x: &DenseMatrix) -> f64 {
    x.norm()
}

pub fn spectral_norm(x: &DenseMatrix) -> Result<f64> {
    Ok(spectral::singular_values(x)?.iter().copied().fold(0.0, f64::max))
}

/// `exp(−Σ pᵢ log pᵢ)` with `pᵢ = σᵢ / ‖X‖_*`.
pub fn effective_rank(x: &DenseMatrix) -> Result<f64> {
    effective_rank_of(&spectral::singular_values(x)?)
}

/// Effective rank from an already computed spectrum (signs are ignored).
pub fn effective_rank_of(singulars: &DVector<f64>) -> Result<f64> {
    let total: f64 = singulars.iter().map(|s| s.abs()).sum();
    if !(total > 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let entropy: f64 = singulars
        .iter()
        .map(|s| s.abs() / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    Ok(entropy.exp())
}

pub fn recon_error(x: &DenseMatrix, xstar: &DenseMatrix) -> Result<f64> {
    if x.shape() != xstar.shape() {
        return Err(Error::ShapeMismatch {
            expected: xstar.shape(),
            got: x.shape(),
        });
    }
    Ok((x - xstar).norm())
}

/// Inputs to the recovery bounds. `scale` is β for the hypentropy form and
/// α for the PSD (entropy) form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub nuclear_star: f64,
    pub n: usize,
    pub nprime: usize,
    pub r: usize,
    pub delta: f64,
    pub scale: f64,
    pub m: usize,
    pub c: f64,
    pub mu0: f64,
    pub mu1: f64,
}

/// A bound value. `valid` is false when the formula degenerates, in which
/// case `value` is `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub valid: bool,
}

impl Bound {
    fn vacuous() -> Self {
        Bound {
            value: f64::INFINITY,
            valid: false,
        }
    }

    fn of(value: f64) -> Self {
        if value.is_finite() && value >= 0.0 {
            Bound { value, valid: true }
        } else {
            Bound::vacuous()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixCompletionBound {
    pub bound: Bound,
    /// Smallest `m` for which the theorem applies.
    pub sample_requirement: u64,
    pub meets_requirement: bool,
    /// Lower bound on the success probability, clamped at 0.
    pub probability: f64,
    /// True when the unclamped probability bound is not positive.
    pub probability_vacuous: bool,
}

/// `½(1 − √(2/3) − δ(1 + √(2/3)))`.
pub fn c_delta(delta: f64) -> f64 {
    let s = (2.0f64 / 3.0).sqrt();
    0.5 * (1.0 - s - delta * (1.0 + s))
}

/// Upper limit on β (hypentropy) or α (entropy).
pub fn scale_limit(nuclear_star: f64, n: usize, psd_form: bool) -> f64 {
    let e = std::f64::consts::E;
    if psd_form {
        nuclear_star / (e * n as f64)
    } else {
        nuclear_star / (1.05 * e * n as f64)
    }
}

/// `Δ_β` (with `log(1.05n)`) or `Δ_α` (with `log n`). Infinite when the scale
/// sits at its limit.
pub fn delta_factor(nuclear_star: f64, n: usize, scale: f64, psd_form: bool) -> Result<f64> {
    check_scale(nuclear_star, n, scale, psd_form)?;
    let base = if psd_form { (n as f64).ln() } else { (1.05 * n as f64).ln() };
    let denom = ((nuclear_star / scale).ln() - 1.0) / base - 1.0;
    Ok(if denom > 0.0 { 1.0 / denom } else { f64::INFINITY })
}

fn check_scale(nuclear_star: f64, n: usize, scale: f64, psd_form: bool) -> Result<()> {
    if !(nuclear_star > 0.0) || n == 0 {
        return Err(Error::ParameterOutOfRange(format!(
            "need positive nuclear norm and n, got {nuclear_star} and {n}"
        )));
    }
    let limit = scale_limit(nuclear_star, n, psd_form);
    // a relative slack lets callers pass the limit itself, which is the
    // degenerate boundary rather than a violation
    if !(scale > 0.0) || scale > limit * (1.0 + 1e-12) {
        let name = if psd_form { "alpha" } else { "beta" };
        return Err(Error::ParameterOutOfRange(format!("{name} = {scale} must lie in (0, {limit}]")));
    }
    Ok(())
}

/// The bracket shared by both theorems: `Δ‖X*‖_* + (1+Δ)nβ/(log(‖X*‖_*/β) − 1)`
/// in the β form and `Δ‖X*‖_*` in the PSD form.
fn bias_term(b: &BoundInputs, psd_form: bool) -> Result<f64> {
    let d = delta_factor(b.nuclear_star, b.n, b.scale, psd_form)?;
    if !d.is_finite() {
        return Ok(f64::INFINITY);
    }
    let mut term = d * b.nuclear_star;
    if !psd_form {
        term += (1.0 + d) * b.n as f64 * b.scale / ((b.nuclear_star / b.scale).ln() - 1.0);
    }
    Ok(term)
}

/// Recovery bound under restricted isometry.
pub fn theorem3_bound(b: &BoundInputs, psd_form: bool) -> Result<Bound> {
    if !(0.0..1.0).contains(&b.delta) {
        return Err(Error::ParameterOutOfRange(format!("delta = {} must lie in [0, 1)", b.delta)));
    }
    if b.r == 0 {
        return Err(Error::ParameterOutOfRange("rank must be positive".into()));
    }
    let term = bias_term(b, psd_form)?;
    let cd = c_delta(b.delta);
    if !(cd > 0.0) || !term.is_finite() {
        return Ok(Bound::vacuous());
    }
    Ok(Bound::of(term / (cd * (3.0 * b.r as f64).sqrt())))
}

/// Recovery bound for matrix completion with uniformly sampled entries.
pub fn theorem4_bound(b: &BoundInputs, psd_form: bool) -> Result<MatrixCompletionBound> {
    if !(b.c > 1.0) {
        return Err(Error::ParameterOutOfRange(format!("c = {} must exceed 1", b.c)));
    }
    if b.m == 0 || b.r == 0 {
        return Err(Error::ParameterOutOfRange("m and r must be positive".into()));
    }
    let (n, np) = if psd_form { (b.n, b.n) } else { (b.n, b.nprime) };
    let (nf, npf) = (n as f64, np as f64);
    let term = bias_term(b, psd_form)?;
    let sampling = 1.0 + (128.0 * b.c * nf * npf * npf.ln().powi(2) / (9.0 * b.m as f64)).sqrt();
    let bound = if term.is_finite() {
        Bound::of(6.0 * term * sampling)
    } else {
        Bound::vacuous()
    };

    let requirement = 32.0 * b.c * (b.mu0 * b.mu0).max(b.mu1) * b.r as f64 * (nf + npf) * (2.0 * npf).ln().powi(2);
    let sample_requirement = requirement.ceil() as u64;

    let raw = 1.0 - 6.0 * npf.ln() * (nf + npf).powf(2.0 - 2.0 * b.c) - npf.powf(2.0 - 2.0 * b.c.sqrt());
    Ok(MatrixCompletionBound {
        bound,
        sample_requirement,
        meets_requirement: b.m as u64 >= sample_requirement,
        probability: raw.max(0.0),
        probability_vacuous: !(raw > 0.0),
    })
}
