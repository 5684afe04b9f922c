//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by construction, quadrature and solver routines.
#[derive(Debug, Error)]
pub enum SphqError {
    /// Hyperbolic space needs dimension at least 2.
    #[error("invalid dimension d = {d}, need d >= 2")]
    InvalidDimension { d: i64 },

    /// An argument left the admissible domain (negative radius, angle
    /// outside `[0, pi]`, ...).
    #[error("domain error: {what}")]
    Domain { what: String },

    /// Adaptive quadrature failed to converge within the panel cap.
    #[error("quadrature did not converge: {what} (last delta {last_delta:.3e}, tol {tol:.3e})")]
    Quadrature {
        what: String,
        last_delta: f64,
        tol: f64,
    },

    /// A grid is too coarse for the requested operation.
    #[error("grid resolution error: {what}")]
    Resolution { what: String },

    /// A decay precondition at the truncation boundary is violated.
    #[error("truncation risk: {what}")]
    TruncationRisk { what: String },

    /// Normalization calibration left a residual above the requirement.
    #[error("calibration failed: residual {residual:.3e} > required {required:.3e} ({detail})")]
    Calibration {
        residual: f64,
        required: f64,
        detail: String,
    },

    /// A radial Levy measure violates its admissibility conditions.
    #[error("invalid Levy measure: {what}")]
    InvalidMeasure { what: String },

    /// A coefficient is not smooth enough for the requested derivative order.
    #[error("smoothness error: {what}")]
    Smoothness { what: String },

    /// Documented out-of-scope route.
    #[error("not implemented: {what}")]
    NotImplemented { what: String },

    /// The Galerkin system is numerically singular.
    #[error("ill-conditioned system: condition estimate {cond:.3e} ({what})")]
    IllConditioned { cond: f64, what: String },

    /// Independent spherical-function evaluators disagree; the table build
    /// is aborted rather than trusted.
    #[error("spherical-function cross-check mismatch {mismatch:.3e} > {tol:.3e} at (lambda, r) = ({lambda}, {r})")]
    TableMismatch {
        mismatch: f64,
        tol: f64,
        lambda: f64,
        r: f64,
    },

    /// Caller misuse (mismatched grids, unknown plot kind, malformed file).
    #[error("usage error: {what}")]
    Usage { what: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl SphqError {
    pub fn domain(what: impl Into<String>) -> Self {
        SphqError::Domain { what: what.into() }
    }

    pub fn usage(what: impl Into<String>) -> Self {
        SphqError::Usage { what: what.into() }
    }
}

pub type Result<T> = std::result::Result<T, SphqError>;
