//! Crate-wide error type with stable message codes.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid parameters (odd n, n too small, bad box size).
    #[error("grid: {0}")]
    Grid(String),

    /// Strength-field or potential parameters violate their invariants.
    #[error("field: {0}")]
    Field(String),

    /// A solver failed to reach the requested tolerance.
    #[error("solver non-convergence at (theta=({0:.4},{1:.4},{2:.4}), k={3}): {4}")]
    NonConvergence(f64, f64, f64, String, String),

    /// Divergent Born regime: the Neumann norm estimate is >= 1.
    #[error("born series divergent: norm estimate {0} >= 1")]
    BornDivergent(f64),

    /// Inputs to an estimator do not cover the requested band or grid.
    #[error("coverage: {0}")]
    Coverage(String),

    /// Mismatched metadata between objects that must share a grid/band.
    #[error("mismatch: {0}")]
    Mismatch(String),

    /// Container decode failures; each code is a stable string.
    #[error("container: {code}: {detail}")]
    Container { code: &'static str, detail: String },

    /// Configuration parse or constraint failure naming the offending key.
    #[error("config: key {key}: {detail}")]
    Config { key: String, detail: String },

    /// Formula preconditions not met (e.g. double-log out of range).
    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn container(code: &'static str, detail: impl Into<String>) -> Self {
        Error::Container {
            code,
            detail: detail.into(),
        }
    }

    pub fn config(key: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            detail: detail.into(),
        }
    }
}
