//! Mirror descent for low-rank matrix sensing.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`] — symmetric eigendecomposition, SVD and spectral lifting of
//!   scalar functions, the substrate for everything else.
//! * [`mirror`] — spectral entropy and spectral hypentropy mirror maps, their
//!   Bregman divergences and implicit-bias potentials.
//! * [`sensing`] — ground-truth and measurement generators, empirical risk,
//!   RIP and coherence diagnostics.
//! * [`optim`] — mirror descent, exponentiated gradient and factorized
//!   gradient descent, plus safe step-size bounds.
//! * [`nucmin`] — the convex nuclear-norm-minimization baseline.
//! * [`metrics`] — norms, effective rank and recovery-bound formulas.
//!
//! Data-parallel loops (Monte Carlo probes, batches of independent runs) go
//! through [`parallel`], which uses rayon when the `parallel` feature is on
//! and falls back to sequential iteration otherwise.

pub mod error;
pub mod metrics;
pub mod mirror;
pub mod nucmin;
pub mod optim;
pub mod parallel;
pub mod rng;
pub mod sensing;
pub mod spectral;

pub use error::{Error, Result};
pub use mirror::{Domain, MirrorMap};
pub use sensing::{GroundTruth, Observations, SensingEnsemble};
pub use spectral::DenseMatrix;
