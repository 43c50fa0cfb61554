//! Independent minimizer of the implicit-bias potentials over the solution
//! set `{X : A(X) = y}`. Uses nalgebra's symmetric eigensolver directly, not
//! the crate's spectral layer, and damped Newton steps restricted to the
//! solution set.

use mdsense_core::rng::{gaussian, stream, Purpose};
use mdsense_core::{DenseMatrix, Observations, SensingEnsemble};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

#[derive(Debug, Clone, Copy)]
pub enum Potential {
    /// `Σ σ log(1/β) + σ log(σ + √(σ² + β²)) − √(σ² + β²)` on all matrices.
    Hypentropy { beta: f64 },
    /// `Σ (log(1/α) − 1) λ + λ log λ` on positive definite matrices.
    Entropy { alpha: f64 },
}

fn embed(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, np) = x.shape();
    let mut j = DMatrix::zeros(n + np, n + np);
    j.view_mut((0, n), (n, np)).copy_from(x);
    j.view_mut((n, 0), (np, n)).copy_from(&x.transpose());
    j
}

impl Potential {
    pub fn value(&self, x: &DMatrix<f64>) -> Option<f64> {
        match *self {
            Potential::Hypentropy { beta } => {
                let k = x.nrows().min(x.ncols());
                let mut ev: Vec<f64> = SymmetricEigen::new(embed(x)).eigenvalues.iter().copied().collect();
                ev.sort_by(|a, b| b.total_cmp(a));
                Some(
                    ev[..k]
                        .iter()
                        .map(|&s| {
                            let s = s.max(0.0);
                            let root = (s * s + beta * beta).sqrt();
                            s * (1.0 / beta).ln() + s * (s + root).ln() - root
                        })
                        .sum(),
                )
            }
            Potential::Entropy { alpha } => {
                let sym = (x + x.transpose()) * 0.5;
                let ev = SymmetricEigen::new(sym).eigenvalues;
                if ev.iter().any(|&l| l <= 0.0) {
                    return None;
                }
                Some(ev.iter().map(|&l| ((1.0 / alpha).ln() - 1.0) * l + l * l.ln()).sum())
            }
        }
    }

    pub fn gradient(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        match *self {
            Potential::Hypentropy { beta } => {
                // odd spectral lift of asinh(·/β) on the embedding; its
                // off-diagonal block is U asinh(Σ/β) Vᵀ
                let (n, np) = x.shape();
                let e = SymmetricEigen::new(embed(x));
                let mut scaled = e.eigenvectors.clone();
                for (j, &l) in e.eigenvalues.iter().enumerate() {
                    scaled.column_mut(j).scale_mut((l / beta).asinh());
                }
                (scaled * e.eigenvectors.transpose()).view((0, n), (n, np)).into_owned()
            }
            Potential::Entropy { alpha } => {
                let e = SymmetricEigen::new((x + x.transpose()) * 0.5);
                let mut scaled = e.eigenvectors.clone();
                for (j, &l) in e.eigenvalues.iter().enumerate() {
                    scaled.column_mut(j).scale_mut(l.ln() + (1.0 / alpha).ln());
                }
                scaled * e.eigenvectors.transpose()
            }
        }
    }
}

/// Orthonormal basis (as columns of vectorized matrices) of the directions
/// that keep `A(X)` fixed, optionally restricted to symmetric matrices.
pub fn null_basis(ens: &SensingEnsemble, symmetric: bool) -> DMatrix<f64> {
    let (n, np) = ens.shape();
    let dim = n * np;
    let mut rows: Vec<DVector<f64>> = (0..ens.m()).map(|i| DVector::from_column_slice(ens.matrix(i).as_slice())).collect();
    if symmetric {
        for i in 0..n {
            for j in 0..i {
                let mut r = DVector::zeros(dim);
                r[i + j * n] = 1.0;
                r[j + i * n] = -1.0;
                rows.push(r);
            }
        }
    }
    let mut ctc = DMatrix::zeros(dim, dim);
    for r in &rows {
        ctc += r * r.transpose();
    }
    let e = SymmetricEigen::new(ctc);
    let top = e.eigenvalues.amax();
    let cols: Vec<DVector<f64>> = (0..dim)
        .filter(|&k| e.eigenvalues[k] <= 1e-10 * top)
        .map(|k| e.eigenvectors.column(k).into_owned())
        .collect();
    DMatrix::from_columns(&cols)
}

/// Least-norm solution of `A(X) = y`.
pub fn least_norm_solution(ens: &SensingEnsemble, y: &Observations) -> DMatrix<f64> {
    let (n, np) = ens.shape();
    let a = DMatrix::from_rows(&(0..ens.m()).map(|i| DVector::from_column_slice(ens.matrix(i).as_slice()).transpose()).collect::<Vec<_>>());
    let coeffs = (&a * a.transpose()).lu().solve(&y.y).expect("independent measurements");
    let v = a.transpose() * coeffs;
    DMatrix::from_column_slice(n, np, v.as_slice())
}

fn reduced_gradient(p: Potential, x: &DMatrix<f64>, basis: &DMatrix<f64>) -> DVector<f64> {
    basis.transpose() * DVector::from_column_slice(p.gradient(x).as_slice())
}

/// Damped Newton in the coordinates of `basis`, with a central-difference
/// Hessian and Armijo backtracking. Falls back to the negative gradient
/// when the Newton direction is not a descent direction.
fn descend(p: Potential, start: DMatrix<f64>, basis: &DMatrix<f64>, iters: usize) -> (DMatrix<f64>, f64) {
    let shape = start.shape();
    let k = basis.ncols();
    let as_matrix = |v: &DVector<f64>| DMatrix::from_column_slice(shape.0, shape.1, (basis * v).as_slice());
    let mut x = start;
    let mut f = p.value(&x).expect("feasible start lies in the domain");
    for _ in 0..iters {
        let g = reduced_gradient(p, &x, basis);
        if g.norm() <= 1e-13 {
            break;
        }
        let mut h = DMatrix::zeros(k, k);
        for j in 0..k {
            let mut step = 1e-6;
            let e = as_matrix(&DVector::from_fn(k, |i, _| if i == j { 1.0 } else { 0.0 }));
            while p.value(&(&x + &e * step)).is_none() || p.value(&(&x - &e * step)).is_none() {
                step *= 0.5;
            }
            let col = (reduced_gradient(p, &(&x + &e * step), basis) - reduced_gradient(p, &(&x - &e * step), basis)) / (2.0 * step);
            h.set_column(j, &col);
        }
        let h = (&h + h.transpose()) * 0.5;
        let mut d = h.cholesky().map(|c| -c.solve(&g)).unwrap_or_else(|| -g.clone());
        if g.dot(&d) >= 0.0 {
            d = -g.clone();
        }
        let slope = g.dot(&d);
        if -slope <= 1e-28 {
            break;
        }
        let dm = as_matrix(&d);
        let mut t = 1.0;
        loop {
            let cand = &x + &dm * t;
            if let Some(fc) = p.value(&cand) {
                if fc <= f + 1e-4 * t * slope {
                    x = cand;
                    f = fc;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-20 {
                return (x, f);
            }
        }
    }
    (x, f)
}

/// Smallest potential found from `restarts` random feasible starts:
/// `center + N z` with Gaussian `z`, shrunk until it lies in the domain.
pub fn minimize(p: Potential, center: &DenseMatrix, basis: &DMatrix<f64>, restarts: usize, iters: usize, seed: u64) -> (DMatrix<f64>, f64) {
    let mut rng = stream(seed, Purpose::Suite, 99);
    let (n, np) = center.shape();
    let mut best: Option<(DMatrix<f64>, f64)> = None;
    for _ in 0..restarts {
        let z = DVector::from_fn(basis.ncols(), |_, _| gaussian(&mut rng));
        let dir = DMatrix::from_column_slice(n, np, (basis * z).as_slice());
        let mut scale = 1.0;
        let start = loop {
            let cand = center + &dir * scale;
            if p.value(&cand).is_some() {
                break cand;
            }
            scale *= 0.5;
        };
        let (x, f) = descend(p, start, basis, iters);
        if best.as_ref().is_none_or(|b| f < b.1) {
            best = Some((x, f));
        }
    }
    best.expect("at least one restart")
}
