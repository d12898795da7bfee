//! Numerical toolkit for constructive extensions of locally bi-Lipschitz,
//! second-order Sobolev homeomorphisms between collared domains.
//!
//! The crate builds every map in the extension pipelines explicitly — slab
//! shears, periodicized homeomorphisms, radial stretches, generalized
//! inversions — and verifies regularity, agreement, separation, and
//! convergence claims by finite differences, quadrature, and dense seeded
//! sampling.
//!
//! Modules:
//! * [`geometry`] — balls, regions, rigid normalizations;
//! * [`map`] — the evaluatable-map abstraction with derivatives, inverses,
//!   composition, and seam-checked gluing;
//! * [`primitives`] — the named analytic maps;
//! * [`extension`] — the three extension pipelines (identity case,
//!   doubly-punctured case, collar case);
//! * [`analysis`] — Lipschitz/Sobolev estimators and separation probes.

pub mod analysis;
pub mod error;
pub mod extension;
pub mod geometry;
pub mod map;
pub mod primitives;

pub use error::{Error, Result};
