//! Numerical verification toolkit for operator inequalities of Kantorovich
//! type: functional calculus on Hermitian matrices, normalized positive
//! linear maps, and checkers that evaluate every link of the inequality
//! chains on concrete instances and report signed spectral gaps.
//!
//! The crate is organized bottom-up:
//!
//! * [`hermitian`] — Hermitian matrices, spectral decomposition, functional
//!   calculus, the Loewner order, operator norms, and geodesic chord
//!   operators.
//! * [`scalar`] — the scalar function registry, linear and geometric chords,
//!   log-convexity classification, and the optimal constants μ(m, M, f) and
//!   K(m, M, p).
//! * [`maps`] — normalized (unital) positive linear maps in Kraus form plus
//!   structured variants (pinching, compression, normalized trace, unitary
//!   mixtures), with empirical validation.
//! * [`checks`] — one checker per inequality chain; each link is reported
//!   with its spectral gap and a verdict under the shared tolerance policy.
//! * [`gen`] — seeded random instance generation (banded spectra, Haar
//!   unitaries, unital maps) and deterministic edge-case instances.
//!
//! Verdict convention used throughout: an operator inequality `X ≤ Y` is
//! measured by `gap = λ_min(Y − X)` and "holds" means
//! `gap ≥ −(atol + rtol · scale)` with `scale = max(1, ‖X‖, ‖Y‖)`.

pub mod checks;
pub mod gen;
pub mod hermitian;
pub mod maps;
pub mod scalar;

use thiserror::Error;

/// Default relative tolerance for inequality verdicts.
pub const DEFAULT_RTOL: f64 = 1e-9;
/// Default absolute tolerance for inequality verdicts.
pub const DEFAULT_ATOL: f64 = 1e-10;

pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for the toolkit.
///
/// Every rejection carries the measured quantity that triggered it so that
/// callers (and campaign logs) can report *why* an input was refused, not
/// just that it was.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}; expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has dimension 0; need at least 1x1")]
    EmptyMatrix,

    #[error("matrix is not Hermitian: asymmetry {asymmetry:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid spectrum bounds: need 0 < m < M, got m = {m}, M = {upper}")]
    InvalidBounds { m: f64, upper: f64 },

    #[error("t = {t} lies outside [{m}, {upper}]")]
    OutsideInterval { t: f64, m: f64, upper: f64 },

    #[error("eigenvalue {eigenvalue} lies outside the domain of {function}")]
    EigenvalueOutsideDomain { eigenvalue: f64, function: String },

    #[error("{function} is not positive at t = {t}: f(t) = {value}")]
    NonPositiveValue { function: String, t: f64, value: f64 },

    #[error("evaluation of {function} at t = {t} is not finite")]
    NonFiniteValue { function: String, t: f64 },

    #[error("spectrum [{lambda_min:.6e}, {lambda_max:.6e}] is not bracketed by [{m}, {upper}]")]
    SpectrumOutsideBounds {
        lambda_min: f64,
        lambda_max: f64,
        m: f64,
        upper: f64,
    },

    #[error("invalid exponent p = {p}: {reason}")]
    InvalidExponent { p: f64, reason: String },

    #[error("cannot parse scalar function from {input:?}")]
    UnknownFunction { input: String },

    #[error("{function} lacks the {property} property required here")]
    MissingFunctionProperty {
        function: String,
        property: &'static str,
    },

    #[error("invalid map specification: {0}")]
    InvalidMap(String),

    #[error("matrix is not positive definite: minimum eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    #[error("sampled Kraus accumulator stayed numerically singular after {attempts} attempts")]
    SingularAccumulator { attempts: u32 },

    #[error("grid needs at least {min} points, got {got}")]
    GridTooSmall { min: usize, got: usize },

    #[error("invalid instance recipe: {0}")]
    InvalidRecipe(String),
}
