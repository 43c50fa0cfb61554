use rand::Rng;

use super::{GroundTruth, Operator, SensingEnsemble};
use crate::error::{Error, Result};
use crate::rng::{gaussian, gaussian_matrix, stream, Purpose};
use crate::spectral::{symmetrize, DenseMatrix};

fn check_rank(n: usize, nprime: usize, r: usize) -> Result<()> {
    if r == 0 || r > n.min(nprime) {
        return Err(Error::InvalidRank { r, rows: n, cols: nprime });
    }
    Ok(())
}

/// `X* = U*U*ᵀ` with i.i.d. N(0,1) `U* ∈ R^{n x r}`, normalized to `‖X*‖_* = 1`.
pub fn gen_lowrank_psd(n: usize, r: usize, seed: u64) -> Result<GroundTruth> {
    check_rank(n, n, r)?;
    let u = gaussian_matrix(&mut stream(seed, Purpose::GroundTruthLeft, 0), n, r);
    // for PSD X*, the nuclear norm is the trace, i.e. ‖U*‖_F²
    let x = symmetrize(&(&u * u.transpose())) / u.norm_squared();
    Ok(GroundTruth {
        matrix: x,
        rank: r,
        psd: true,
    })
}

/// `X* = U*V*ᵀ` with independent N(0,1) factors, normalized to `‖X*‖_* = 1`.
pub fn gen_lowrank_rect(n: usize, nprime: usize, r: usize, seed: u64) -> Result<GroundTruth> {
    check_rank(n, nprime, r)?;
    let u = gaussian_matrix(&mut stream(seed, Purpose::GroundTruthLeft, 0), n, r);
    let v = gaussian_matrix(&mut stream(seed, Purpose::GroundTruthRight, 0), nprime, r);
    let x = &u * v.transpose();
    let nuclear = crate::spectral::singular_values(&x)?.sum();
    Ok(GroundTruth {
        matrix: x / nuclear,
        rank: r,
        psd: false,
    })
}

/// `m` symmetric matrices `Aᵢ = (Bᵢ + Bᵢᵀ)/2` with i.i.d. N(0,1) `Bᵢ`.
pub fn gen_gaussian_sym(n: usize, m: usize, seed: u64) -> Result<SensingEnsemble> {
    check_sizes(n, n, m)?;
    let mut rng = stream(seed, Purpose::SensingMatrices, 0);
    let mut columns = DenseMatrix::zeros(n * n, m);
    for i in 0..m {
        let b = gaussian_matrix(&mut rng, n, n);
        columns.column_mut(i).copy_from_slice(symmetrize(&b).as_slice());
    }
    Ok(SensingEnsemble::new((n, n), Operator::Dense { columns }, true, Some(seed)))
}

/// `m` matrices with i.i.d. N(0,1) entries.
pub fn gen_gaussian_rect(n: usize, nprime: usize, m: usize, seed: u64) -> Result<SensingEnsemble> {
    check_sizes(n, nprime, m)?;
    let mut rng = stream(seed, Purpose::SensingMatrices, 0);
    let mut columns = DenseMatrix::zeros(n * nprime, m);
    for i in 0..m {
        let b = gaussian_matrix(&mut rng, n, nprime);
        columns.column_mut(i).copy_from_slice(b.as_slice());
    }
    Ok(SensingEnsemble::new((n, nprime), Operator::Dense { columns }, false, Some(seed)))
}

/// `m` diagonal matrices with N(0,1) diagonals: symmetric and mutually
/// commuting.
pub fn gen_diagonal(n: usize, m: usize, seed: u64) -> Result<SensingEnsemble> {
    check_sizes(n, n, m)?;
    let mut rng = stream(seed, Purpose::Diagonal, 0);
    let mut columns = DenseMatrix::zeros(n * n, m);
    for i in 0..m {
        for k in 0..n {
            columns[(k * n + k, i)] = gaussian(&mut rng);
        }
    }
    Ok(SensingEnsemble::new((n, n), Operator::Dense { columns }, true, Some(seed)))
}

/// `m` uniformly random observed entries, each `Aᵢ = e_a e_bᵀ`.
pub fn gen_completion(n: usize, nprime: usize, m: usize, seed: u64, replacement: bool) -> Result<SensingEnsemble> {
    check_sizes(n, nprime, m)?;
    let total = n * nprime;
    let mut rng = stream(seed, Purpose::CompletionMask, 0);
    let flat: Vec<usize> = if replacement {
        (0..m).map(|_| rng.random_range(0..total)).collect()
    } else {
        if m > total {
            return Err(Error::TooManySamples { m, available: total });
        }
        rand::seq::index::sample(&mut rng, total, m).into_vec()
    };
    let indices = flat.into_iter().map(|k| (k / nprime, k % nprime)).collect();
    Ok(SensingEnsemble::new((n, nprime), Operator::Mask { indices }, false, Some(seed)))
}

fn check_sizes(n: usize, nprime: usize, m: usize) -> Result<()> {
    if n == 0 || nprime == 0 || m == 0 {
        return Err(Error::InvalidArgument(format!(
            "ensemble dimensions must be positive (n={n}, n'={nprime}, m={m})"
        )));
    }
    Ok(())
}
