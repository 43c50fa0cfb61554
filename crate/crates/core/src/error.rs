use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
    #[error("input asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.3e}")]
    AsymmetricInput { asymmetry: f64, tolerance: f64 },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("numerical failure: {0}")]
    NumericalFailure(&'static str),
    #[error("scalar function undefined at spectral value {value:e}")]
    DomainError { value: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },
    #[error("matrix is not positive definite (eigenvalue {eigenvalue:e} below floor {floor:e})")]
    NotPd { eigenvalue: f64, floor: f64 },
    #[error("spectral argument {value:e} exceeds overflow guard")]
    Overflow { value: f64 },
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("invalid rank {r} for {rows}x{cols} matrix")]
    InvalidRank { r: usize, rows: usize, cols: usize },
    #[error("cannot draw {m} distinct entries from {available}")]
    TooManySamples { m: usize, available: usize },
    #[error("basis columns are not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },
    #[error("matrix is zero")]
    ZeroMatrix,
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("risk {risk:e} exceeded divergence threshold {threshold:e} at iteration {iter}")]
    Divergence {
        iter: usize,
        risk: f64,
        threshold: f64,
    },
    #[error("no convergence after {iters} iterations (primal {primal:.3e}, dual {dual:.3e})")]
    MaxItersExceeded {
        iters: usize,
        primal: f64,
        dual: f64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
