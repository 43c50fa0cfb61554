//! Iterative algorithms: mirror descent, exponentiated gradient and
//! factorized gradient descent, all driven by the same iteration loop.
//!
//! Mirror descent keeps the dual iterate `Z_t = ∇Φ(X_t)` and updates it
//! additively, `Z_{t+1} = Z_t − η∇f(X_t)`, mapping back with `∇Φ⁻¹` only to
//! evaluate the gradient. This is the same recursion as recomputing
//! `∇Φ(X_t)` every step but never takes the logarithm of a tiny, badly
//! resolved eigenvalue.
//!
//! On square problems whose iterates are symmetric, the risk gradient is
//! replaced by its symmetric part, which is the gradient of `f` restricted
//! to symmetric matrices. For symmetric sensing matrices this is a no-op.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::metrics;
use crate::mirror::{MirrorMap, PD_FLOOR};
use crate::sensing::{Observations, SensingEnsemble};
use crate::spectral::{self, ensure_square, symmetrize, DenseMatrix};

/// Runs whose risk exceeds this multiple of the initial risk are aborted.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    MirrorDescent(MirrorMap),
    ExpGradient,
    GdFactoredPsd,
    GdFactoredSym,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub step: f64,
    pub max_iters: usize,
    pub risk_tol: f64,
    /// Initialization scale α, used by [`run`] to build default starting points.
    pub init_alpha: f64,
    /// Store the dense iterate every this many iterations; 0 keeps only the
    /// initial and final iterates.
    pub snapshot_every: usize,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm, step: f64) -> Self {
        RunConfig {
            algorithm,
            step,
            max_iters: 5000,
            risk_tol: 1e-12,
            init_alpha: 1e-3,
            snapshot_every: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {}", self.step)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.risk_tol >= 0.0) {
            return Err(Error::InvalidArgument(format!("risk_tol must be nonnegative, got {}", self.risk_tol)));
        }
        if !(self.init_alpha > 0.0 && self.init_alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("init_alpha must be positive, got {}", self.init_alpha)));
        }
        Ok(())
    }
}

/// A sensing problem: ensemble, observations and optionally the ground truth
/// used for reconstruction errors.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub ens: &'a SensingEnsemble,
    pub y: &'a Observations,
    pub xstar: Option<&'a DenseMatrix>,
}

impl<'a> Problem<'a> {
    pub fn new(ens: &'a SensingEnsemble, y: &'a Observations) -> Self {
        Problem { ens, y, xstar: None }
    }

    pub fn with_truth(mut self, xstar: &'a DenseMatrix) -> Self {
        self.xstar = Some(xstar);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub risk: f64,
    pub nuclear_norm: f64,
    /// 0 for the zero matrix.
    pub effective_rank: f64,
    pub recon_error: Option<f64>,
    /// `D_Φ(X_final, X_t)`, filled after a mirror descent run for iterates
    /// that were snapshotted.
    pub bregman_to_final: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<IterRecord>,
    pub final_iterate: DenseMatrix,
    pub converged: bool,
    pub iters_run: usize,
    /// `(iter, X_iter)` pairs, always including the first and last iterate.
    pub snapshots: Vec<(usize, DenseMatrix)>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&IterRecord> {
        self.records.last()
    }

    pub fn initial_iterate(&self) -> Option<&DenseMatrix> {
        self.snapshots.first().filter(|(t, _)| *t == 0).map(|(_, x)| x)
    }
}

/// A run that stopped on an error. `partial` holds everything up to the last
/// good iterate.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{error} (after {} iterations)", partial.iters_run)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Trajectory,
}

pub type RunResult = std::result::Result<Trajectory, RunFailure>;

/// One algorithm's state between iterations.
trait Iterate {
    fn matrix(&self) -> &DenseMatrix;
    /// Singular values of the current iterate.
    fn singulars(&self) -> Result<DVector<f64>>;
    /// Whether the gradient should be restricted to symmetric matrices.
    fn symmetric(&self) -> bool;
    fn advance(&mut self, grad: &DenseMatrix, step: f64) -> Result<()>;
}

fn record(problem: &Problem, iter: usize, risk: f64, x: &DenseMatrix, sv: &DVector<f64>) -> Result<IterRecord> {
    let nuclear_norm = sv.iter().map(|s| s.abs()).sum();
    let effective_rank = if nuclear_norm > 0.0 {
        metrics::effective_rank_of(sv)?
    } else {
        0.0
    };
    let recon_error = problem.xstar.map(|xs| metrics::recon_error(x, xs)).transpose()?;
    Ok(IterRecord {
        iter,
        risk,
        nuclear_norm,
        effective_rank,
        recon_error,
        bregman_to_final: None,
    })
}

fn drive(problem: &Problem, cfg: &RunConfig, mut state: impl Iterate) -> RunResult {
    let mut traj = Trajectory {
        records: Vec::with_capacity(cfg.max_iters.min(100_000) + 1),
        final_iterate: state.matrix().clone(),
        converged: false,
        iters_run: 0,
        snapshots: vec![(0, state.matrix().clone())],
    };
    let fail = |error: Error, mut traj: Trajectory| {
        if traj.snapshots.last().map(|(t, _)| *t) != Some(traj.iters_run) {
            traj.snapshots.push((traj.iters_run, traj.final_iterate.clone()));
        }
        Err(RunFailure { error, partial: traj })
    };
    if let Err(e) = cfg.validate() {
        return fail(e, traj);
    }

    let eval = |state: &dyn Iterate| -> Result<(f64, DenseMatrix)> {
        let (risk, g) = problem.ens.risk_and_grad(problem.y, state.matrix())?;
        Ok((risk, if state.symmetric() { symmetrize(&g) } else { g }))
    };
    let first = eval(&state).and_then(|(risk, g)| {
        let rec = record(problem, 0, risk, state.matrix(), &state.singulars()?)?;
        Ok((risk, g, rec))
    });
    let (mut risk, mut grad) = match first {
        Ok((risk, g, rec)) => {
            traj.records.push(rec);
            (risk, g)
        }
        Err(e) => return fail(e, traj),
    };
    let threshold = DIVERGENCE_FACTOR * risk;

    for t in 1..=cfg.max_iters {
        if risk <= cfg.risk_tol {
            traj.converged = true;
            break;
        }
        let step = state.advance(&grad, cfg.step).and_then(|()| {
            let (r, g) = eval(&state)?;
            if !r.is_finite() || r > threshold {
                return Err(Error::Divergence {
                    iter: t,
                    risk: r,
                    threshold,
                });
            }
            let rec = record(problem, t, r, state.matrix(), &state.singulars()?)?;
            Ok((r, g, rec))
        });
        match step {
            Ok((r, g, rec)) => {
                risk = r;
                grad = g;
                traj.records.push(rec);
                traj.iters_run = t;
                traj.final_iterate = state.matrix().clone();
                if cfg.snapshot_every > 0 && t % cfg.snapshot_every == 0 {
                    traj.snapshots.push((t, traj.final_iterate.clone()));
                }
            }
            Err(e) => return fail(e, traj),
        }
    }
    traj.converged |= risk <= cfg.risk_tol;
    if traj.snapshots.last().map(|(t, _)| *t) != Some(traj.iters_run) {
        traj.snapshots.push((traj.iters_run, traj.final_iterate.clone()));
    }
    Ok(traj)
}

fn check_square(ens: &SensingEnsemble) -> Result<usize> {
    let (n, np) = ens.shape();
    if n != np {
        return Err(Error::NonSquare { rows: n, cols: np });
    }
    Ok(n)
}

fn failed_before_start(error: Error, x0: &DenseMatrix) -> RunFailure {
    RunFailure {
        error,
        partial: Trajectory {
            records: Vec::new(),
            final_iterate: x0.clone(),
            converged: false,
            iters_run: 0,
            snapshots: vec![(0, x0.clone())],
        },
    }
}

struct Mirror {
    map: MirrorMap,
    dual: DenseMatrix,
    x: DenseMatrix,
    sv: DVector<f64>,
}

impl Iterate for Mirror {
    fn matrix(&self) -> &DenseMatrix {
        &self.x
    }

    fn singulars(&self) -> Result<DVector<f64>> {
        Ok(self.sv.clone())
    }

    fn symmetric(&self) -> bool {
        self.map.domain().is_symmetric()
    }

    fn advance(&mut self, grad: &DenseMatrix, step: f64) -> Result<()> {
        self.dual -= grad * step;
        if self.symmetric() {
            self.dual = symmetrize(&self.dual);
        }
        let (x, sv) = self.map.grad_inverse_spectral(&self.dual)?;
        if self.map == MirrorMap::SpectralEntropy {
            let floor = PD_FLOOR * sv[0].max(1.0);
            let lowest = sv[sv.len() - 1];
            if !(lowest > floor) {
                return Err(Error::NotPd { eigenvalue: lowest, floor });
            }
        }
        self.x = if self.symmetric() { symmetrize(&x) } else { x };
        self.sv = sv;
        Ok(())
    }
}

/// Mirror descent `∇Φ(X_{t+1}) = ∇Φ(X_t) − η∇f(X_t)` from `x0`.
pub fn mirror_descent(map: MirrorMap, problem: &Problem, x0: &DenseMatrix, cfg: &RunConfig) -> RunResult {
    let setup = || -> Result<Mirror> {
        if map.domain().is_symmetric() {
            check_square(problem.ens)?;
        }
        if x0.shape() != problem.ens.shape() {
            return Err(Error::ShapeMismatch {
                expected: problem.ens.shape(),
                got: x0.shape(),
            });
        }
        let x = if map.domain().is_symmetric() { symmetrize(x0) } else { x0.clone() };
        let dual = map.grad(&x)?;
        let sv = spectral::singular_values(&x)?;
        Ok(Mirror { map, dual, x, sv })
    };
    let state = setup().map_err(|e| failed_before_start(e, x0))?;
    let mut traj = drive(problem, cfg, state)?;
    fill_bregman(map, &mut traj);
    Ok(traj)
}

fn fill_bregman(map: MirrorMap, traj: &mut Trajectory) {
    for (t, x) in &traj.snapshots {
        if let Some(rec) = traj.records.get_mut(*t) {
            rec.bregman_to_final = map.bregman(&traj.final_iterate, x).ok();
        }
    }
}

struct ExpGrad {
    u: DenseMatrix,
    v: DenseMatrix,
    x: DenseMatrix,
}

impl Iterate for ExpGrad {
    fn matrix(&self) -> &DenseMatrix {
        &self.x
    }

    fn singulars(&self) -> Result<DVector<f64>> {
        let eig = spectral::sym_eig(&self.x)?;
        Ok(eig.eigenvalues.map(f64::abs))
    }

    fn symmetric(&self) -> bool {
        true
    }

    fn advance(&mut self, grad: &DenseMatrix, step: f64) -> Result<()> {
        let (u, v) = exp_gradient_step(&self.u, &self.v, grad, step)?;
        self.x = &u - &v;
        self.u = u;
        self.v = v;
        Ok(())
    }
}

/// One exponentiated-gradient update of the factors `(U, V)` for a
/// symmetric gradient. Both exponentials share one eigendecomposition.
pub fn exp_gradient_step(u: &DenseMatrix, v: &DenseMatrix, grad: &DenseMatrix, step: f64) -> Result<(DenseMatrix, DenseMatrix)> {
    let eig = spectral::sym_eig(grad)?;
    let largest = step * eig.max_abs_eigenvalue();
    if largest > crate::mirror::OVERFLOW_GUARD || !largest.is_finite() {
        return Err(Error::Overflow { value: largest });
    }
    let shrink = eig.compose(&eig.eigenvalues.map(|l| (-step * l).exp()));
    let grow = eig.compose(&eig.eigenvalues.map(|l| (step * l).exp()));
    // (UE + EU)/2 is the symmetric part of UE for symmetric U and E
    Ok((symmetrize(&(u * &shrink)), symmetrize(&(v * &grow))))
}

/// Exponentiated gradient on `X = U − V`:
/// `U ← (U e^{−η∇f} + e^{−η∇f} U)/2`, `V ← (V e^{η∇f} + e^{η∇f} V)/2`.
pub fn exp_gradient(problem: &Problem, u0: &DenseMatrix, v0: &DenseMatrix, cfg: &RunConfig) -> RunResult {
    let x0 = u0 - v0;
    let setup = || -> Result<ExpGrad> {
        let n = check_square(problem.ens)?;
        for m in [u0, v0] {
            if ensure_square(m)? != n {
                return Err(Error::ShapeMismatch {
                    expected: (n, n),
                    got: m.shape(),
                });
            }
        }
        let u = spectral::checked_symmetric(u0)?;
        let v = spectral::checked_symmetric(v0)?;
        Ok(ExpGrad { x: &u - &v, u, v })
    };
    drive(problem, cfg, setup().map_err(|e| failed_before_start(e, &x0))?)
}

struct Factored {
    u: DenseMatrix,
    v: Option<DenseMatrix>,
    x: DenseMatrix,
}

impl Factored {
    fn compose(u: &DenseMatrix, v: Option<&DenseMatrix>) -> DenseMatrix {
        let x = u * u.transpose();
        symmetrize(&match v {
            Some(v) => x - v * v.transpose(),
            None => x,
        })
    }
}

impl Iterate for Factored {
    fn matrix(&self) -> &DenseMatrix {
        &self.x
    }

    fn singulars(&self) -> Result<DVector<f64>> {
        Ok(spectral::sym_eig(&self.x)?.eigenvalues.map(f64::abs))
    }

    fn symmetric(&self) -> bool {
        true
    }

    fn advance(&mut self, grad: &DenseMatrix, step: f64) -> Result<()> {
        // grad is already symmetric, so ∇f·U + ∇fᵀ·U = 2∇f·U
        let g2 = grad * (2.0 * step);
        self.u -= &g2 * &self.u;
        if let Some(v) = &mut self.v {
            *v += &g2 * &*v;
        }
        self.x = Self::compose(&self.u, self.v.as_ref());
        spectral::ensure_finite(&self.x, "factored iterate")
    }
}

fn factored(problem: &Problem, u0: &DenseMatrix, v0: Option<&DenseMatrix>, cfg: &RunConfig) -> RunResult {
    let x0 = Factored::compose(u0, v0);
    let setup = || -> Result<Factored> {
        let n = check_square(problem.ens)?;
        for m in std::iter::once(u0).chain(v0) {
            if m.nrows() != n {
                return Err(Error::ShapeMismatch {
                    expected: (n, m.ncols()),
                    got: m.shape(),
                });
            }
        }
        if let Some(v) = v0 {
            if v.ncols() != u0.ncols() {
                return Err(Error::ShapeMismatch {
                    expected: u0.shape(),
                    got: v.shape(),
                });
            }
        }
        Ok(Factored {
            u: u0.clone(),
            v: v0.cloned(),
            x: x0.clone(),
        })
    };
    drive(problem, cfg, setup().map_err(|e| failed_before_start(e, &x0))?)
}

/// Gradient descent on `X = UUᵀ` with `U ← U − η(∇f·U + ∇fᵀ·U)`.
pub fn gd_factored_psd(problem: &Problem, u0: &DenseMatrix, cfg: &RunConfig) -> RunResult {
    factored(problem, u0, None, cfg)
}

/// Gradient descent on `X = UUᵀ − VVᵀ` with `U ← U − 2η∇f·U`,
/// `V ← V + 2η∇f·V`.
pub fn gd_factored_sym(problem: &Problem, u0: &DenseMatrix, v0: &DenseMatrix, cfg: &RunConfig) -> RunResult {
    factored(problem, u0, Some(v0), cfg)
}

/// Runs `cfg.algorithm` from its default initialization at scale
/// `α = cfg.init_alpha`:
///
/// | algorithm            | start                        | `X₀`   |
/// |----------------------|------------------------------|--------|
/// | entropy MD           | `αI`                         | `αI`   |
/// | hypentropy MD        | `0`                          | `0`    |
/// | exponentiated grad.  | `U₀ = V₀ = (α/2)I`           | `0`    |
/// | GD on `UUᵀ`          | `U₀ = √α I`                  | `αI`   |
/// | GD on `UUᵀ − VVᵀ`    | `U₀ = V₀ = √(α/2) I`         | `0`    |
pub fn run(problem: &Problem, cfg: &RunConfig) -> RunResult {
    let (n, np) = problem.ens.shape();
    let a = cfg.init_alpha;
    let eye = DenseMatrix::identity(n, n);
    match cfg.algorithm {
        Algorithm::MirrorDescent(map @ MirrorMap::SpectralEntropy) => mirror_descent(map, problem, &(&eye * a), cfg),
        Algorithm::MirrorDescent(map) => mirror_descent(map, problem, &DenseMatrix::zeros(n, np), cfg),
        Algorithm::ExpGradient => exp_gradient(problem, &(&eye * (a / 2.0)), &(&eye * (a / 2.0)), cfg),
        Algorithm::GdFactoredPsd => gd_factored_psd(problem, &(&eye * a.sqrt()), cfg),
        Algorithm::GdFactoredSym => {
            let u0 = &eye * (a / 2.0).sqrt();
            gd_factored_sym(problem, &u0, &u0, cfg)
        }
    }
}

/// Step-size bound as the minimum of a risk-dependent and a
/// curvature-dependent term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepBound {
    /// `(1/(8√2)) (L f(X))^{−1/2}`; `None` when `f(X) = 0` leaves it unbounded.
    pub risk_term: Option<f64>,
    /// `(1/4) (L (‖X‖_* + βn))^{−1}`, without the `βn` term for the entropy.
    pub curvature_term: f64,
}

impl StepBound {
    pub fn value(&self) -> f64 {
        self.risk_term.map_or(self.curvature_term, |r| r.min(self.curvature_term))
    }
}

/// Safe step size at `x`, with `L = (1/m) Σ ‖Aᵢ‖₂²`.
pub fn safe_step_bound(ens: &SensingEnsemble, y: &Observations, x: &DenseMatrix, map: MirrorMap) -> Result<StepBound> {
    let l = ens.mean_sq_spectral_norm()?;
    let f = ens.risk(y, x)?;
    let risk_term = (f > 0.0).then(|| 1.0 / (8.0 * 2f64.sqrt() * (l * f).sqrt()));
    let nuclear = metrics::nuclear_norm(x)?;
    let extra = map.beta().map_or(0.0, |b| b * ens.shape().0.min(ens.shape().1) as f64);
    Ok(StepBound {
        risk_term,
        curvature_term: 0.25 / (l * (nuclear + extra)),
    })
}
