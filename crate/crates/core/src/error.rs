use num_complex::Complex64;
use thiserror::Error;

use crate::classify::StabilityVerdict;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shock parameters: {0}")]
    InvalidParameters(String),

    /// `M >= M*`: the downstream state is not hyperbolic in the normal direction.
    #[error("non-hyperbolic point: M = {mach} is not below M* = {mach_star}")]
    NonHyperbolicPoint { mach: f64, mach_star: f64 },

    #[error("degenerate dispersion polynomial: leading coefficient {leading:e} (coefficient norm {norm:e})")]
    DegeneratePolynomial { leading: f64, norm: f64 },

    #[error("cannot separate the decaying root at s = {s}, omega = {omega}: both candidates have |Re| below {tol:e}")]
    BranchAmbiguity { s: Complex64, omega: f64, tol: f64 },

    #[error(
        "rows 2..7 of the interior symbol are dependent (smallest singular value {smallest:e})"
    )]
    SingularSelection { smallest: f64 },

    #[error(
        "recovered frequency xi = {xi} lies on the wrong side of the transition point {bound}"
    )]
    BranchMismatch { xi: f64, bound: f64 },

    #[error("closed-form and numerical classification disagree ({})", .0.summary())]
    Disagreement(Box<StabilityVerdict>),

    #[error("sweep has {0} points, limit is 10^7")]
    SweepTooLarge(u128),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
