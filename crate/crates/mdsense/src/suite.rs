//! Cross-module invariant checks on small seeded instances. Each check
//! returns a measured residual; the suite compares it with a fixed
//! tolerance.

use mdsense_core::mirror::{hypentropy_potential, Domain};
use mdsense_core::nucmin::{nucmin, AffineProjector, NucminConfig};
use mdsense_core::optim::{
    exp_gradient, gd_factored_sym, mirror_descent, safe_step_bound, Algorithm, Problem, RunConfig, Trajectory,
};
use mdsense_core::rng::{gaussian_matrix, stream, Purpose, StreamRng};
use mdsense_core::sensing::{
    gen_diagonal, gen_gaussian_rect, gen_gaussian_sym, gen_lowrank_psd, gen_lowrank_rect,
};
use mdsense_core::spectral::{lift_sym, symmetrize};
use mdsense_core::{metrics, DenseMatrix, MirrorMap, Observations, Result, SensingEnsemble};
use nalgebra::DVector;
use rand::Rng;
use serde::Serialize;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub invariant: &'static str,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

fn rng(seed: u64, index: u64) -> StreamRng {
    stream(seed, Purpose::Suite, index)
}

fn steps(algorithm: Algorithm, step: f64, iters: usize) -> RunConfig {
    RunConfig {
        max_iters: iters,
        risk_tol: 0.0,
        snapshot_every: 1,
        ..RunConfig::new(algorithm, step)
    }
}

fn snapshots(traj: &Trajectory) -> Vec<&DenseMatrix> {
    traj.snapshots.iter().map(|(_, x)| x).collect()
}

fn max_deviation(a: &Trajectory, b: &Trajectory) -> f64 {
    let (xa, xb) = (snapshots(a), snapshots(b));
    if xa.len() != xb.len() {
        return f64::INFINITY;
    }
    xa.iter().zip(&xb).map(|(p, q)| (*p - *q).norm()).fold(0.0, f64::max)
}

/// A zero-risk matrix different from `xs`: `xs` plus a null-space direction.
pub fn null_shift(ens: &SensingEnsemble, xs: &DenseMatrix, rng: &mut StreamRng, scale: f64) -> Result<DenseMatrix> {
    let (n, np) = ens.shape();
    let h = gaussian_matrix(rng, n, np);
    let coeffs = ens
        .gram()
        .lu()
        .solve(&ens.measure(&h)?.y)
        .ok_or(mdsense_core::Error::NumericalFailure("singular Gram matrix"))?;
    let nul = h - ens.adjoint(&coeffs)?;
    let norm = nul.norm();
    Ok(xs + nul * (scale / norm))
}

/// Largest relative residual of
/// `D(X′, X_{t+1}) − D(X′, X_t) = −η⟨∇f(X_t), X_t − X′⟩ + D(X_t, X_{t+1})`
/// along a trajectory.
pub fn bregman_identity_residual(map: MirrorMap, problem: &Problem, traj: &Trajectory, eta: f64, reference: &DenseMatrix) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for pair in snapshots(traj).windows(2) {
        let (xt, xn) = (pair[0], pair[1]);
        let mut g = problem.ens.risk_grad(problem.y, xt)?;
        if map.domain().is_symmetric() {
            g = symmetrize(&g);
        }
        let lhs = map.bregman(reference, xn)? - map.bregman(reference, xt)?;
        let step = -eta * g.dot(&(xt - reference));
        let local = map.bregman(xt, xn)?;
        let scale = lhs.abs().max(step.abs()).max(local.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((lhs - step - local).abs() / scale);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BregmanEvolution {
    /// Worst relative identity residual over both mirror maps.
    pub identity: f64,
    /// Worst relative disagreement of per-step decrements to two zero-risk
    /// references.
    pub reference_gap: f64,
    pub iterations: usize,
}

/// Bregman bookkeeping over `iters` steps on underdetermined instances:
/// rectangular hypentropy (4×5, 8 measurements) and PSD entropy (4×4, 6).
pub fn bregman_evolution(seed: u64, iters: usize) -> Result<BregmanEvolution> {
    let ens = gen_gaussian_rect(4, 5, 8, seed)?;
    let xs = gen_lowrank_rect(4, 5, 1, seed)?.matrix;
    let y = ens.measure(&xs)?;
    let problem = Problem::new(&ens, &y);
    let map = MirrorMap::hypentropy(0.05)?;
    let x0 = DenseMatrix::zeros(4, 5);
    let eta = 0.5 * safe_step_bound(&ens, &y, &x0, map)?.value();
    let traj = mirror_descent(map, &problem, &x0, &steps(Algorithm::MirrorDescent(map), eta, iters)).map_err(|f| f.error)?;
    let mut identity = bregman_identity_residual(map, &problem, &traj, eta, &xs)?;

    let other = null_shift(&ens, &xs, &mut rng(seed, 1), 0.5)?;
    let mut reference_gap: f64 = 0.0;
    for pair in snapshots(&traj).windows(2) {
        let dec = |r: &DenseMatrix| -> Result<f64> { Ok(map.bregman(r, pair[0])? - map.bregman(r, pair[1])?) };
        let (a, b) = (dec(&xs)?, dec(&other)?);
        reference_gap = reference_gap.max((a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE));
    }

    let ens = gen_gaussian_sym(4, 6, seed)?;
    let xs = gen_lowrank_psd(4, 1, seed)?.matrix;
    let y = ens.measure(&xs)?;
    let problem = Problem::new(&ens, &y);
    let map = MirrorMap::entropy();
    let x0 = DenseMatrix::identity(4, 4) * 0.1;
    let eta = 0.5 * safe_step_bound(&ens, &y, &x0, map)?.value();
    let traj = mirror_descent(map, &problem, &x0, &steps(Algorithm::MirrorDescent(map), eta, iters)).map_err(|f| f.error)?;
    identity = identity.max(bregman_identity_residual(map, &problem, &traj, eta, &xs)?);

    Ok(BregmanEvolution {
        identity,
        reference_gap,
        iterations: traj.iters_run,
    })
}

/// Commuting instance: diagonal sensing matrices and a diagonal PSD target.
pub fn commuting_instance(n: usize, m: usize, seed: u64) -> Result<(SensingEnsemble, Observations)> {
    let ens = gen_diagonal(n, m, seed)?;
    let target = DVector::from_fn(n, |k, _| if k % 2 == 0 { 0.5 / (k + 1) as f64 } else { 0.0 });
    let y = ens.measure(&DenseMatrix::from_diagonal(&target))?;
    Ok((ens, y))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equivalences {
    /// Entropy mirror descent from `αI` vs exponentiated gradient from
    /// `(αI, 0)`: largest per-iteration Frobenius gap.
    pub entropy: f64,
    /// Hypentropy mirror descent from 0 vs exponentiated gradient from
    /// `U₀ = V₀ = (β/2)I`.
    pub hypentropy: f64,
    /// Largest `‖U_t V_t − ¼β²I‖_F` along the second run.
    pub conserved_product: f64,
}

/// Mirror descent against exponentiated gradient on a commuting instance
/// (`n = 6`, `m = 4`).
pub fn proposition_one(seed: u64, iters: usize) -> Result<Equivalences> {
    let n = 6;
    let (ens, y) = commuting_instance(n, 4, seed)?;
    let problem = Problem::new(&ens, &y);
    let eta = 0.2;
    let eye = DenseMatrix::identity(n, n);
    let zero = DenseMatrix::zeros(n, n);

    let alpha = 1e-3;
    let map = MirrorMap::entropy();
    let md = mirror_descent(map, &problem, &(&eye * alpha), &steps(Algorithm::MirrorDescent(map), eta, iters)).map_err(|f| f.error)?;
    let eg = exp_gradient(&problem, &(&eye * alpha), &zero, &steps(Algorithm::ExpGradient, eta, iters)).map_err(|f| f.error)?;
    let entropy = max_deviation(&md, &eg);

    let beta = 1e-3;
    let map = MirrorMap::hypentropy_on(beta, Domain::Symmetric)?;
    let md = mirror_descent(map, &problem, &zero, &steps(Algorithm::MirrorDescent(map), eta, iters)).map_err(|f| f.error)?;
    let half = &eye * (beta / 2.0);
    let eg = exp_gradient(&problem, &half, &half, &steps(Algorithm::ExpGradient, eta, iters)).map_err(|f| f.error)?;
    let hypentropy = max_deviation(&md, &eg);

    // replay the factors, which the trajectory does not keep
    let target = &eye * (beta * beta / 4.0);
    let (mut u, mut v) = (half.clone(), half);
    let mut conserved: f64 = (&u * &v - &target).norm();
    for _ in 0..iters {
        let g = symmetrize(&ens.risk_grad(&y, &(&u - &v))?);
        (u, v) = mdsense_core::optim::exp_gradient_step(&u, &v, &g, eta)?;
        conserved = conserved.max((&u * &v - &target).norm());
    }
    Ok(Equivalences {
        entropy,
        hypentropy,
        conserved_product: conserved,
    })
}

/// One-step gap between `gd_factored_sym` at step `eta/4` from `(aI, bI)`
/// and exponentiated gradient at step `eta` from `(a²I, b²I)`.
pub fn gd_eg_gap(ens: &SensingEnsemble, y: &Observations, eta: f64) -> Result<f64> {
    let problem = Problem::new(ens, y);
    let n = ens.shape().0;
    let eye = DenseMatrix::identity(n, n);
    let (a, b) = (0.3, 0.1);
    let gd = gd_factored_sym(&problem, &(&eye * a), &(&eye * b), &steps(Algorithm::GdFactoredSym, eta / 4.0, 1)).map_err(|f| f.error)?;
    let eg = exp_gradient(&problem, &(&eye * (a * a)), &(&eye * (b * b)), &steps(Algorithm::ExpGradient, eta, 1)).map_err(|f| f.error)?;
    Ok((&gd.final_iterate - &eg.final_iterate).norm())
}

/// Gap ratios for successive halvings of `etas`.
pub fn gd_first_order_ratios(seed: u64, etas: &[f64]) -> Result<Vec<f64>> {
    let (ens, y) = commuting_instance(6, 4, seed)?;
    let gaps: Vec<f64> = etas.iter().map(|&e| gd_eg_gap(&ens, &y, e)).collect::<Result<_>>()?;
    Ok(gaps.windows(2).map(|w| w[0] / w[1]).collect())
}

fn random_orthogonal(rng: &mut StreamRng, n: usize) -> DenseMatrix {
    gaussian_matrix(rng, n, n).qr().q()
}

/// Random PSD matrix with eigenvalues log-uniform in `[lo, hi]`.
pub fn random_psd(rng: &mut StreamRng, n: usize, lo: f64, hi: f64) -> DenseMatrix {
    let q = random_orthogonal(rng, n);
    let lambda = DVector::from_fn(n, |_, _| rng.random_range(lo.ln()..=hi.ln()).exp());
    symmetrize(&(&q * DenseMatrix::from_diagonal(&lambda) * q.transpose()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrongConvexity {
    /// Largest `bound − D(X, Y)` for entropy; nonpositive when it holds.
    pub entropy: f64,
    /// Same for hypentropy over the supplied β values.
    pub hypentropy: f64,
}

/// Samples `pairs` PSD pairs (`n = 5`, eigenvalues in `[1e-3, 10]`) and
/// checks `D(X, Y) ≥ ‖X − Y‖_*² / (4τ)` for entropy and
/// `‖X − Y‖_*² / (4(τ + βn))` for hypentropy, `τ = max(‖X‖_*, ‖Y‖_*)`.
pub fn strong_convexity(seed: u64, pairs: usize, betas: &[f64]) -> Result<StrongConvexity> {
    let n = 5;
    let mut r = rng(seed, 2);
    let mut out = StrongConvexity {
        entropy: f64::NEG_INFINITY,
        hypentropy: f64::NEG_INFINITY,
    };
    for _ in 0..pairs {
        let x = random_psd(&mut r, n, 1e-3, 10.0);
        let y = random_psd(&mut r, n, 1e-3, 10.0);
        let tau = metrics::nuclear_norm(&x)?.max(metrics::nuclear_norm(&y)?);
        let gap = metrics::nuclear_norm(&(&x - &y))?.powi(2);
        out.entropy = out.entropy.max(gap / (4.0 * tau) - MirrorMap::entropy().bregman(&x, &y)?);
        for &beta in betas {
            let map = MirrorMap::hypentropy(beta)?;
            out.hypentropy = out.hypentropy.max(gap / (4.0 * (tau + beta * n as f64)) - map.bregman(&x, &y)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialLimits {
    /// Pairs whose nuclear-norm and Frobenius-norm argmins differ.
    pub contested: usize,
    /// Contested pairs where the small-β potential disagrees with the
    /// nuclear norm.
    pub nuclear_mismatches: usize,
    /// Contested pairs where the large-β potential disagrees with the
    /// Frobenius norm.
    pub frobenius_mismatches: usize,
}

/// Pairs a rank-one candidate of unit nuclear norm with a full-rank one of
/// larger nuclear norm, in random order, and compares argmins.
pub fn potential_limits(seed: u64, pairs: usize) -> Result<PotentialLimits> {
    let n = 5;
    let mut r = rng(seed, 3);
    let mut out = PotentialLimits {
        contested: 0,
        nuclear_mismatches: 0,
        frobenius_mismatches: 0,
    };
    for _ in 0..pairs {
        let u = gaussian_matrix(&mut r, n, 1);
        let v = gaussian_matrix(&mut r, n, 1);
        let low = &u * v.transpose() / (u.norm() * v.norm());
        let full = gaussian_matrix(&mut r, n, n);
        let full = &full * (r.random_range(1.25..1.75) / metrics::nuclear_norm(&full)?);
        let mut cands = [low, full];
        if r.random_bool(0.5) {
            cands.swap(0, 1);
        }
        let argmin = |f: &dyn Fn(&DenseMatrix) -> Result<f64>| -> Result<usize> { Ok(usize::from(f(&cands[1])? < f(&cands[0])?)) };
        let nuc = argmin(&|x| metrics::nuclear_norm(x))?;
        let fro = argmin(&|x| Ok(x.norm()))?;
        if nuc == fro {
            continue;
        }
        out.contested += 1;
        if argmin(&|x| hypentropy_potential(x, 1e-6))? != nuc {
            out.nuclear_mismatches += 1;
        }
        let big = 1e4 * metrics::spectral_norm(&cands[0])?.max(metrics::spectral_norm(&cands[1])?);
        if argmin(&|x| hypentropy_potential(x, big))? != fro {
            out.frobenius_mismatches += 1;
        }
    }
    Ok(out)
}

/// Nuclear-norm completion of `[[1, 1], [1, ?]]`; returns the free entry.
pub fn nucmin_two_by_two() -> Result<f64> {
    let ens = SensingEnsemble::from_indices((2, 2), vec![(0, 0), (0, 1), (1, 0)])?;
    let y = Observations {
        y: DVector::from_element(3, 1.0),
    };
    let out = nucmin(&ens, &y, &NucminConfig::default()).map_err(|f| f.error)?;
    Ok(out.matrix[(1, 1)])
}

/// Largest excess of the nucmin nuclear norm over constructed feasible
/// points (ground truth and projections of random matrices), together with
/// the solution's own constraint violation `‖A(X) − y‖`.
pub fn nucmin_optimality(seed: u64, candidates: usize) -> Result<(f64, f64)> {
    let gt = gen_lowrank_rect(5, 6, 1, seed)?;
    let ens = gen_gaussian_rect(5, 6, 20, seed)?;
    let y = ens.measure(&gt.matrix)?;
    let out = nucmin(&ens, &y, &NucminConfig::default()).map_err(|f| f.error)?;
    let best = metrics::nuclear_norm(&out.matrix)?;
    let violation = ens.residual(&y, &out.matrix)?.norm();
    let projector = AffineProjector::new(&ens)?;
    let mut r = rng(seed, 4);
    let mut excess = best - metrics::nuclear_norm(&gt.matrix)?;
    for _ in 0..candidates {
        let z = projector.project(&y, &gaussian_matrix(&mut r, 5, 6))?;
        excess = excess.max(best - metrics::nuclear_norm(&z)?);
    }
    Ok((excess, violation))
}

/// Relative error of the risk gradient against a central difference.
pub fn gradient_check(seed: u64) -> Result<f64> {
    let ens = gen_gaussian_rect(3, 4, 5, seed)?;
    let mut r = rng(seed, 5);
    let y = Observations {
        y: DVector::from_fn(5, |_, _| r.random_range(-1.0..1.0)),
    };
    let x = gaussian_matrix(&mut r, 3, 4);
    let h = gaussian_matrix(&mut r, 3, 4);
    let eps = 1e-5;
    let fd = (ens.risk(&y, &(&x + &h * eps))? - ens.risk(&y, &(&x - &h * eps))?) / (2.0 * eps);
    let exact = ens.risk_grad(&y, &x)?.dot(&h);
    Ok((fd - exact).abs() / exact.abs().max(1e-12))
}

/// `exp(log X)` against `X` for a random positive-definite matrix.
pub fn spectral_round_trip(seed: u64) -> Result<f64> {
    let x = random_psd(&mut rng(seed, 6), 6, 1e-3, 10.0);
    let back = lift_sym(&lift_sym(&x, f64::ln)?, f64::exp)?;
    Ok((&back - &x).norm() / x.norm())
}

/// Largest one-step risk increase of hypentropy mirror descent at half the
/// safe step.
pub fn safe_step_monotone(seed: u64, iters: usize) -> Result<f64> {
    let ens = gen_gaussian_sym(5, 12, seed)?;
    let gt = gen_lowrank_psd(5, 1, seed)?;
    let y = ens.measure(&gt.matrix)?;
    let problem = Problem::new(&ens, &y);
    let map = MirrorMap::hypentropy_on(1e-3, Domain::Symmetric)?;
    let x0 = DenseMatrix::zeros(5, 5);
    let eta = 0.5 * safe_step_bound(&ens, &y, &x0, map)?.value();
    let mut cfg = steps(Algorithm::MirrorDescent(map), eta, iters);
    cfg.snapshot_every = 0;
    let traj = mirror_descent(map, &problem, &x0, &cfg).map_err(|f| f.error)?;
    Ok(traj.records.windows(2).map(|w| w[1].risk - w[0].risk).fold(f64::NEG_INFINITY, f64::max))
}

/// Runs every invariant at `seed`.
pub fn run_invariant_suite(seed: u64) -> Vec<InvariantReport> {
    let mut reports = Vec::new();
    let mut push = |invariant: &'static str, residual: Result<f64>, tolerance: f64| {
        let residual = residual.unwrap_or(f64::NAN);
        reports.push(InvariantReport {
            invariant,
            passed: residual <= tolerance,
            residual,
            tolerance,
        });
    };

    let bregman = bregman_evolution(seed, 200);
    push("bregman-evolution-identity", bregman.as_ref().map(|b| b.identity).map_err(Clone::clone), 1e-8);
    push("bregman-reference-independence", bregman.map(|b| b.reference_gap), 1e-8);

    let prop = proposition_one(seed, 100);
    push("entropy-md-matches-exp-gradient", prop.as_ref().map(|p| p.entropy).map_err(Clone::clone), 1e-10);
    push("hypentropy-md-matches-exp-gradient", prop.as_ref().map(|p| p.hypentropy).map_err(Clone::clone), 1e-10);
    push("exp-gradient-conserved-product", prop.map(|p| p.conserved_product), 1e-9);

    push(
        "factored-gd-first-order",
        gd_first_order_ratios(seed, &[1e-2, 5e-3, 2.5e-3]).map(|r| r.iter().map(|q| (q - 4.0).abs()).fold(0.0, f64::max)),
        0.5,
    );

    let sc = strong_convexity(seed, 500, &[0.1, 1.0]);
    push("entropy-strong-convexity", sc.as_ref().map(|s| s.entropy).map_err(Clone::clone), 1e-9);
    push("hypentropy-strong-convexity", sc.map(|s| s.hypentropy), 1e-9);

    let limits = potential_limits(seed, 50);
    push(
        "potential-limits",
        limits.map(|l| if l.contested == 0 { f64::NAN } else { (l.nuclear_mismatches + l.frobenius_mismatches) as f64 }),
        0.0,
    );

    push("nucmin-two-by-two-completion", nucmin_two_by_two().map(|v| (v - 1.0).abs()), 1e-4);
    let opt = nucmin_optimality(seed, 20);
    push("nucmin-no-worse-than-feasible-points", opt.as_ref().map(|o| o.0).map_err(Clone::clone), 1e-6);
    push("nucmin-feasibility", opt.map(|o| o.1), 1e-8);

    push("risk-gradient-finite-difference", gradient_check(seed), 1e-6);
    push("spectral-exp-log-round-trip", spectral_round_trip(seed), 1e-10);
    push("safe-step-risk-monotone", safe_step_monotone(seed, 300), 1e-12);
    reports
}
