//! Quasi-interpolation operators of Kantorovich type on the torus, the
//! Smolyak sparse-grid algorithm over hyperbolic crosses, and the mixed-
//! smoothness Besov/Triebel-Lizorkin norm machinery needed to benchmark
//! their convergence rates.
//!
//! The crate is organized around a handful of small pure layers:
//!
//! * [`fourier`] — sparse trigonometric polynomials, dyadic grids, folding
//!   DFTs and hyperbolic-cross index sets;
//! * [`kernels`] — level-indexed Fourier symbols for reconstruction kernels
//!   and averagers (de la Vallée Poussin, Dirichlet, characteristic-function
//!   averagers, shifted-delta combinations);
//! * [`operators`] — the quasi-interpolation operators themselves, with two
//!   independent evaluation paths (exact aliasing and sampled reconstruction);
//! * [`smolyak`] — mixed differences, the Smolyak sum and its combination-
//!   technique evaluation;
//! * [`spaces`] — dyadic resolutions of unity, Besov/Triebel-Lizorkin norms
//!   and discrete Littlewood-Paley quasi-norms;
//! * [`testbed`] — witness functions, error sweeps and rate fitting;
//! * [`config`] / [`commands`] — the `hypercross` benchmark CLI.
//!
//! All L_p norms use the normalized measure (2π)^{-d} dx, so that
//! `‖e^{i(k,x)}‖_p = 1` for every p. Everything is immutable after
//! construction and safe to share across threads.

pub mod commands;
pub mod config;
pub mod fourier;
pub mod kernels;
pub mod operators;
pub mod smolyak;
pub mod spaces;
pub mod testbed;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("tensor shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch { expected: Vec<usize>, got: Vec<usize> },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature did not converge: estimated error {est:e} above tolerance {tol:e}")]
    QuadratureNotConverged { est: f64, tol: f64 },
    #[error("quadrature refinement disagreement: relative difference {0:e}")]
    QuadratureDisagreement(f64),
    #[error("singular linear system in {0}")]
    SingularSystem(&'static str),
    #[error("order estimate indeterminate: slope {slope} with residual {resid}")]
    IndeterminateOrder { slope: f64, resid: f64 },
    #[error("rank-deficient rate fit: {0} usable records")]
    RankDeficientFit(usize),
    #[error("unsupported function model for this operation: {0}")]
    UnsupportedModel(&'static str),
    #[error("averager kind has no time-domain norm: {0}")]
    AveragerKindNotApplicable(&'static str),
    #[error("config validation failed for field `{field}`: {reason}")]
    ConfigInvalid { field: String, reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
