//! Experiment configuration: flat `key = value` lines, `#` starts a comment,
//! lists are comma separated.
//!
//! ```text
//! experiment = alpha-sweep
//! n = 50
//! r = 5
//! m = 750
//! ensemble = gaussian-sym
//! algorithms = md-entropy:1, gd-psd:0.25
//! alpha_grid = 1e-1, 1e-2, 1e-3
//! seed = 7
//! output_dir = out/fig1
//! emit_svg = true
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mdsense_core::mirror::Domain;
use mdsense_core::optim::{Algorithm, RunConfig};
use mdsense_core::MirrorMap;

use crate::AppError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    AlphaSweep,
    SingleRun,
    InvariantSuite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleSpec {
    GaussianSym,
    GaussianRect,
    Completion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AlgorithmName {
    MdEntropy,
    MdHypentropy,
    ExpGradient,
    GdPsd,
    GdSym,
}

impl AlgorithmName {
    pub const ALL: [AlgorithmName; 5] = [
        AlgorithmName::MdEntropy,
        AlgorithmName::MdHypentropy,
        AlgorithmName::ExpGradient,
        AlgorithmName::GdPsd,
        AlgorithmName::GdSym,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AlgorithmName::MdEntropy => "md-entropy",
            AlgorithmName::MdHypentropy => "md-hypentropy",
            AlgorithmName::ExpGradient => "exp-gradient",
            AlgorithmName::GdPsd => "gd-psd",
            AlgorithmName::GdSym => "gd-sym",
        }
    }

    /// Whether the algorithm only produces symmetric iterates.
    pub fn needs_square(self) -> bool {
        self != AlgorithmName::MdHypentropy
    }
}

impl fmt::Display for AlgorithmName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AlgorithmName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        AlgorithmName::ALL
            .into_iter()
            .find(|a| a.label() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?}"))
    }
}

/// An algorithm with its constant step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmSpec {
    pub name: AlgorithmName,
    pub step: f64,
}

impl AlgorithmSpec {
    /// Run configuration at initialization scale `alpha`. The hypentropy
    /// map uses `β = α`; its domain is symmetric whenever the problem is.
    pub fn run_config(&self, alpha: f64, symmetric: bool, max_iters: usize, risk_tol: f64) -> Result<RunConfig, AppError> {
        let algorithm = match self.name {
            AlgorithmName::MdEntropy => Algorithm::MirrorDescent(MirrorMap::entropy()),
            AlgorithmName::MdHypentropy => {
                let domain = if symmetric { Domain::Symmetric } else { Domain::Rectangular };
                Algorithm::MirrorDescent(MirrorMap::hypentropy_on(alpha, domain).map_err(|e| AppError::Config(e.to_string()))?)
            }
            AlgorithmName::ExpGradient => Algorithm::ExpGradient,
            AlgorithmName::GdPsd => Algorithm::GdFactoredPsd,
            AlgorithmName::GdSym => Algorithm::GdFactoredSym,
        };
        Ok(RunConfig {
            max_iters,
            risk_tol,
            init_alpha: alpha,
            ..RunConfig::new(algorithm, self.step)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub nprime: usize,
    pub r: usize,
    pub m: usize,
    pub ensemble: EnsembleSpec,
    pub algorithms: Vec<AlgorithmSpec>,
    pub alpha_grid: Vec<f64>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
    pub max_iters: usize,
    pub risk_tol: f64,
    /// Iterate snapshot interval for single runs (0 keeps endpoints only).
    pub snapshot_every: usize,
    /// RIP level δ assumed by the `bounds` subcommand.
    pub delta: f64,
    /// Constant `c > 1` of the completion bound.
    pub c: f64,
    /// Monte Carlo trials for the RIP estimate in `bounds`.
    pub rip_trials: usize,
}

impl ExperimentConfig {
    /// Square problems get a PSD ground truth and symmetric iterates.
    pub fn is_square(&self) -> bool {
        self.n == self.nprime
    }

    pub fn from_file(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
        text.parse()
    }

    fn validate(&self) -> Result<(), String> {
        if self.n == 0 || self.nprime == 0 || self.m == 0 {
            return Err("n, nprime and m must be positive".into());
        }
        if self.r == 0 || self.r > self.n.min(self.nprime) {
            return Err(format!("r = {} must lie in 1..={}", self.r, self.n.min(self.nprime)));
        }
        if self.ensemble == EnsembleSpec::GaussianSym && !self.is_square() {
            return Err("gaussian-sym needs n = nprime".into());
        }
        if self.ensemble == EnsembleSpec::Completion && self.m > self.n * self.nprime {
            return Err(format!("cannot observe {} distinct entries of a {}x{} matrix", self.m, self.n, self.nprime));
        }
        if self.experiment != ExperimentKind::InvariantSuite && self.algorithms.is_empty() {
            return Err("algorithms must list at least one algorithm".into());
        }
        for a in &self.algorithms {
            if a.name.needs_square() && !self.is_square() {
                return Err(format!("{} needs a square problem", a.name));
            }
            if !(a.step > 0.0 && a.step.is_finite()) {
                return Err(format!("step for {} must be positive", a.name));
            }
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].iter().any(|b| b.name == a.name) {
                return Err(format!("{} listed twice", a.name));
            }
        }
        match self.experiment {
            ExperimentKind::AlphaSweep if self.alpha_grid.is_empty() => return Err("alpha_grid must be nonempty".into()),
            ExperimentKind::SingleRun if self.alpha_grid.len() != 1 => {
                return Err("a single run takes exactly one alpha_grid value".into())
            }
            _ => {}
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(format!("alpha {a} must be positive"));
        }
        if self.max_iters == 0 {
            return Err("max_iters must be positive".into());
        }
        if !(self.risk_tol >= 0.0) {
            return Err("risk_tol must be nonnegative".into());
        }
        if self.rip_trials == 0 {
            return Err("rip_trials must be positive".into());
        }
        Ok(())
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    v.parse().map_err(|e| format!("{key}: cannot parse {v:?}: {e}"))
}

fn parse_list<T>(v: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(f).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("{key}: expected true or false, got {v:?}")),
    }
}

impl FromStr for ExperimentConfig {
    type Err = AppError;

    fn from_str(text: &str) -> Result<Self, AppError> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| AppError::Config(format!("line {}: expected key = value", i + 1)))?;
            let key = k.trim().to_string();
            if entries.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(AppError::Config(format!("line {}: duplicate key {key:?}", i + 1)));
            }
        }
        let at = |key: &str, msg: String| {
            let line = entries.get(key).map_or(0, |e| e.0);
            AppError::Config(format!("line {line}: {msg}"))
        };
        let get = |key: &str| entries.get(key).map(|e| e.1.as_str());
        let required = |key: &str| get(key).ok_or_else(|| AppError::Config(format!("missing key {key:?}")));

        const KNOWN: [&str; 17] = [
            "experiment", "n", "nprime", "r", "m", "ensemble", "algorithms", "alpha_grid", "seed", "output_dir",
            "emit_svg", "max_iters", "risk_tol", "snapshot_every", "delta", "c", "rip_trials",
        ];
        if let Some(k) = entries.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return Err(at(k, format!("unknown key {k:?}")));
        }

        let experiment = match required("experiment")? {
            "alpha-sweep" => ExperimentKind::AlphaSweep,
            "single-run" => ExperimentKind::SingleRun,
            "invariant-suite" => ExperimentKind::InvariantSuite,
            other => return Err(at("experiment", format!("unknown experiment {other:?}"))),
        };
        let ensemble = match required("ensemble")? {
            "gaussian-sym" => EnsembleSpec::GaussianSym,
            "gaussian-rect" => EnsembleSpec::GaussianRect,
            "completion" => EnsembleSpec::Completion,
            other => return Err(at("ensemble", format!("unknown ensemble {other:?}"))),
        };
        let num = |key: &str| -> Result<usize, AppError> { parse_num(key, required(key)?).map_err(|e| at(key, e)) };
        let opt = |key: &str, default: f64| -> Result<f64, AppError> {
            get(key).map_or(Ok(default), |v| parse_num(key, v).map_err(|e| at(key, e)))
        };
        let opt_usize = |key: &str, default: usize| -> Result<usize, AppError> {
            get(key).map_or(Ok(default), |v| parse_num(key, v).map_err(|e| at(key, e)))
        };

        let n = num("n")?;
        let algorithms = parse_list(get("algorithms").unwrap_or(""), |item| {
            let (name, step) = item
                .split_once(':')
                .ok_or_else(|| format!("algorithm {item:?} must be written name:step"))?;
            Ok(AlgorithmSpec {
                name: name.trim().parse()?,
                step: parse_num("step", step.trim())?,
            })
        })
        .map_err(|e| at("algorithms", e))?;
        let alpha_grid =
            parse_list(get("alpha_grid").unwrap_or(""), |v| parse_num("alpha_grid", v)).map_err(|e| at("alpha_grid", e))?;

        let cfg = ExperimentConfig {
            experiment,
            n,
            nprime: opt_usize("nprime", n)?,
            r: num("r")?,
            m: num("m")?,
            ensemble,
            algorithms,
            alpha_grid,
            seed: parse_num("seed", required("seed")?).map_err(|e| at("seed", e))?,
            output_dir: PathBuf::from(get("output_dir").unwrap_or("out")),
            emit_svg: get("emit_svg").map_or(Ok(true), |v| parse_bool("emit_svg", v)).map_err(|e| at("emit_svg", e))?,
            max_iters: opt_usize("max_iters", 5000)?,
            risk_tol: opt("risk_tol", 1e-12)?,
            snapshot_every: opt_usize("snapshot_every", 0)?,
            delta: opt("delta", 0.1)?,
            c: opt("c", 1.1)?,
            rip_trials: opt_usize("rip_trials", 10_000)?,
        };
        cfg.validate().map_err(AppError::Config)?;
        Ok(cfg)
    }
}
