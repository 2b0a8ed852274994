//! Error types shared by all modules.

use thiserror::Error;

/// Errors raised by problem construction, rule evaluation, and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// A real-valued argument was NaN or infinite.
    #[error("non-finite input to {0}")]
    NonFinite(&'static str),

    /// A probability left the unit interval.
    #[error("probability {0} outside [0, 1]")]
    ProbabilityRange(f64),

    /// Generic precondition violation.
    #[error("{0}")]
    Domain(String),

    /// Vector or matrix dimensions do not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// The problem specification admits no meaningful solution
    /// (e.g. a prior located at the origin).
    #[error("degenerate specification: {0}")]
    DegenerateSpec(String),

    /// The identified set is empty at the requested point.
    #[error("infeasible bounds at {context}: lower {lower} exceeds upper {upper}")]
    InfeasibleBounds {
        context: String,
        lower: f64,
        upper: f64,
    },

    /// The sum of the welfare bounds at the prior location vanishes for both
    /// signs of the prior location, so the sign normalization cannot be applied.
    #[error("knife-edge normalization: upper + lower welfare bound is {sum} at the prior location and its reflection")]
    KnifeEdge { sum: f64 },

    /// Cholesky factorization failed.
    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    /// The rule's linear index has zero variance under the signal distribution.
    #[error("degenerate index: index variance {0} is not positive")]
    DegenerateIndex(f64),

    /// An operation was called in the wrong identification regime.
    #[error("regime mismatch: {detail}")]
    Regime { detail: String },

    /// Bracketed root finding did not reach the requested residual.
    #[error("root finding failed: {detail} (bracket [{lo}, {hi}], f(lo) = {f_lo}, f(hi) = {f_hi})")]
    RootFind {
        detail: String,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
}

impl Error {
    /// True for numerical failures, false for specification or usage errors.
    /// The CLI maps the former to exit code 3 and the latter to exit code 2.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::RootFind { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
