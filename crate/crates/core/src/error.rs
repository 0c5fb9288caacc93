//! Crate-wide error type.

/// Errors produced by geometry, capacity, operator and solver routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Profile parameters violate positivity or ordering requirements.
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    /// The volume integrand fails the integrability probe at the origin.
    #[error("integrand not integrable near the origin: {0}")]
    DivergentAtOrigin(String),

    /// Annulus radii are not ordered as 0 < R1 < R2.
    #[error("bad annulus: r1 = {r1}, r2 = {r2}")]
    BadAnnulus { r1: f64, r2: f64 },

    /// An integrand or profile produced a non-finite value.
    #[error("evaluation failure: {0}")]
    EvaluationFailure(String),

    /// A quantity exceeded the f64 range. Criteria that can saturate
    /// (volumes in growth denominators) may catch this and continue.
    #[error("{context} overflowed at r = {at:e}")]
    Overflow { context: &'static str, at: f64 },

    /// An improper integral could not be classified within the cutoff budget.
    #[error("indeterminate: {0}")]
    Indeterminate(String),

    /// The energy minimizer ran out of iterations.
    #[error("minimizer did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// A structure condition failed at a grid point.
    #[error(
        "condition {condition} violated at s = {s:.6e} (ratio {ratio:.6e}, claimed {claimed:.6e})"
    )]
    ConditionViolated {
        condition: &'static str,
        s: f64,
        ratio: f64,
        claimed: f64,
    },

    /// A sampled vector pair produced a nonpositive monotonicity product.
    #[error("nonmonotone operator: sample pair {index} has nonpositive monotonicity product {value:.6e}")]
    NonMonotone { index: usize, value: f64 },

    /// The claimed D1/D2 constants do not bracket the root of A(s) = t.
    #[error("bracket failure inverting A at t = {t:.6e}")]
    BracketFailure { t: f64 },

    /// A shell or annulus sequence violates ordering or growth requirements.
    #[error("bad sequence: {0}")]
    BadSequence(String),

    /// Two radial functions do not share a usable common grid.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The exterior profile does not exist because its defining integral diverges.
    #[error("parabolic profile: the tail integral of f^(-q) diverges, no exterior profile exists")]
    ParabolicProfile,

    /// The logarithmic growth bound is only meaningful for p = n.
    #[error("p = {p} but this check requires p = n = {n}")]
    PNotEqualN { p: f64, n: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
