//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("point lies outside the domain of `{map}`")]
    DomainViolation { map: String },

    #[error("map `{map}` is singular at the requested point")]
    SingularPoint { map: String },

    #[error("map `{map}` carries no inverse handle")]
    NoInverse { map: String },

    #[error("numeric inversion of `{map}` did not converge (best residual {residual:.3e} after {starts} starts)")]
    NonConvergence {
        map: String,
        starts: usize,
        residual: f64,
    },

    #[error("membership undecidable: point within {tolerance:.1e} of the region boundary")]
    BoundaryUndecidable { tolerance: f64 },

    #[error("seam mismatch of {gap:.3e} exceeds tolerance {tolerance:.1e} at {point:?}")]
    SeamMismatch {
        gap: f64,
        tolerance: f64,
        point: Vec<f64>,
    },

    #[error("insufficient interior margin for finite differences (need {needed:.3e}, have {margin:.3e})")]
    InsufficientMargin { needed: f64, margin: f64 },

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("slab separation failed for a={a}: measured c1={c1:.6} is not below c2={c2:.6}")]
    SeparationFailure { a: f64, c1: f64, c2: f64 },

    #[error("check `{check}` failed: {detail}")]
    CheckFailure { check: String, detail: String },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}

pub type Result<T> = std::result::Result<T, Error>;
