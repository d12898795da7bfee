//! The constructive extension pipelines.
//!
//! Three stages, each reducing to the previous one:
//! * identity case — the input agrees with the identity outside a ball and
//!   the image holes are separated by a slab; the extension is assembled
//!   from a shear and a periodicized copy of the input;
//! * doubly-punctured case — a radial stretch conjugation manufactures the
//!   identity-outside-a-ball hypothesis;
//! * collar case — a generalized inversion turns a collar pair into a
//!   doubly-punctured pair, and the finished extension is conjugated back.

mod collar;
mod disjoint;
mod identity;
mod periodic;

pub use collar::{build_extension_collar, CollarInput};
pub use disjoint::build_extension_disjoint;
pub use identity::{build_extension_identity, classify_sigma, IdentityCaseInput, SigmaClass, SlabSpec};
pub use periodic::periodicize;

use nalgebra::DVector;

use crate::analysis::CheckFlag;
use crate::error::{Error, Result};
use crate::geometry::{Ball, Point, Region, Similarity};
use crate::map::SmoothMap;

/// Budgets and tolerances for the internal verification passes the builders
/// run while assembling an extension.
#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub seed: u64,
    /// Samples per internal check.
    pub samples: usize,
    /// Number of lattice translates built explicitly; beyond the window the
    /// tail branches are exactly the identity or the lattice step.
    pub k_max: i64,
    /// Seam agreement tolerance for piecewise assembly.
    pub seam_tol: f64,
    /// Residual allowed for "agrees with the identity" hypotheses.
    pub id_tol: f64,
    /// Extension-agreement tolerance on the boundary neighborhood.
    pub agree_tol: f64,
    /// Round-trip tolerance for the assembled extension and its inverse.
    pub inverse_tol: f64,
    /// Collar stage: override for the inversion exponent a (defaults to
    /// min(1/2, (n/p − 1)/2)).
    pub inversion_exponent: Option<f64>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            seed: 0x51AB,
            samples: 600,
            k_max: 8,
            seam_tol: 1e-9,
            id_tol: 1e-12,
            agree_tol: 1e-9,
            inverse_tol: 1e-8,
            inversion_exponent: None,
        }
    }
}

/// The assembled extension with every intermediate map and region the
/// pipeline produced, plus the measured values of its internal checks.
pub struct ExtensionBundle {
    /// The extension itself.
    pub extension: SmoothMap,
    pub extension_inv: SmoothMap,
    /// Neighborhood of the outer boundary on which the extension agrees with
    /// the input map.
    pub neighborhood: Region,
    /// Unit-frame shear S.
    pub shear: SmoothMap,
    /// Unit-frame periodicized map g* and its inverse.
    pub periodicized: SmoothMap,
    pub periodicized_inv: SmoothMap,
    /// Unit-frame core composite τ₁ ∘ g*⁻¹ ∘ S ∘ g*.
    pub core: SmoothMap,
    /// Complement of all hole translates, the region where the core
    /// composite dispatches (caller frame).
    pub periodic_complement: Region,
    /// Preimage of the closed slab under g* (caller frame).
    pub slab_preimage: Region,
    /// Component of the slab-preimage complement reaching below / above.
    pub below_component: Region,
    pub above_component: Region,
    /// Conjugation from the caller frame to the unit frame.
    pub frame: Similarity,
    /// Slab levels (a, b) in the unit frame.
    pub unit_slab: (f64, f64),
    pub k_max: i64,
    /// Later stages: radial stretch R, conjugated map h, inner extension H,
    /// inversion I, and the conjugates R* = I⁻¹RI, H* = I⁻¹HI.
    pub stretch: Option<SmoothMap>,
    pub conjugated: Option<SmoothMap>,
    pub inner_extension: Option<SmoothMap>,
    pub inversion: Option<SmoothMap>,
    pub stretch_conjugate: Option<SmoothMap>,
    pub extension_conjugate: Option<SmoothMap>,
    /// Domain-side preparation applied before the collar pipeline
    /// (translation taking the preimage of 0 to 0, then a dilation).
    pub domain_prep: Option<Similarity>,
    /// Image-side rigid normalization applied before the collar pipeline.
    pub image_prep: Option<Similarity>,
    /// Collar stage: the extension in the prepared frame (inversion center
    /// at the origin). Evaluate this one near the puncture; the re-composed
    /// `extension` in original coordinates loses the polar structure of deep
    /// points to rounding in the similarity round-trip.
    pub extension_prepared: Option<SmoothMap>,
    /// Measured values of the internal verification passes.
    pub checks: Vec<CheckFlag>,
}

impl ExtensionBundle {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckFlag> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub(crate) fn push_check(checks: &mut Vec<CheckFlag>, name: &str, measured: f64, tol: f64) {
    checks.push(CheckFlag {
        name: name.to_string(),
        pass: measured <= tol,
        measured,
    });
}

pub(crate) fn require_check(checks: &[CheckFlag]) -> Result<()> {
    for c in checks {
        if !c.pass {
            return Err(Error::CheckFailure {
                check: c.name.clone(),
                detail: format!("measured {:.3e}", c.measured),
            });
        }
    }
    Ok(())
}

/// Smallest power of two at or above `x`; exact dilation factors keep
/// far-field identities bitwise.
pub(crate) fn next_power_of_two(x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite());
    let mut p = 1.0f64;
    while p < x {
        p *= 2.0;
    }
    while p * 0.5 >= x {
        p *= 0.5;
    }
    p
}

/// Largest sampled |x| over a region boundary, seen from `center`.
pub(crate) fn sampled_outer_radius(
    region: &Region,
    center: &Point,
    seed: u64,
    count: usize,
    window: f64,
) -> Result<f64> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pts = region.sample_boundary(&mut rng, count, window);
    if pts.is_empty() {
        return Err(Error::Sampling("no boundary samples for radius estimate".into()));
    }
    Ok(pts
        .iter()
        .map(|p| (p - center).norm())
        .fold(0.0, f64::max))
}

/// Largest radius t such that the sphere of radius t about `center` stays
/// inside the region (bisection over sampled spheres).
pub(crate) fn inscribed_radius(
    region: &Region,
    center: &Point,
    max_radius: f64,
    seed: u64,
) -> Result<f64> {
    let stream = crate::analysis::SampleStream::new(seed);
    let dim = center.len();
    let inside = |t: f64| -> bool {
        (0..96u64).all(|i| {
            let x = center + t * stream.direction(i, dim);
            region.margin(&x) > 0.0
        })
    };
    if !inside(1e-9 * max_radius.max(1.0)) {
        return Err(Error::Sampling("center is not interior to the region".into()));
    }
    let (mut lo, mut hi) = (0.0f64, max_radius);
    if inside(hi) {
        return Ok(hi);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

pub(crate) fn zeros(dim: usize) -> Point {
    DVector::zeros(dim)
}

/// Enclosing ball of a region estimated from boundary samples, padded for
/// safety. Used to guard expensive preimage membership tests; a hull that is
/// accidentally tight would surface as a seam mismatch in the glue checks.
pub(crate) fn sampled_enclosure(region: &Region, seed: u64, window: f64) -> Option<Ball> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pts = region.sample_boundary(&mut rng, 128, window);
    if pts.len() < 8 {
        return None;
    }
    let dim = pts[0].len();
    let mut center = DVector::zeros(dim);
    for p in &pts {
        center += p;
    }
    center /= pts.len() as f64;
    let radius = pts
        .iter()
        .map(|p| (p - &center).norm())
        .fold(0.0f64, f64::max);
    Some(Ball {
        center,
        radius: radius * 1.2 + 1e-9,
    })
}

/// Guard a region with its sampled enclosure when one is available.
pub(crate) fn guard_region(region: Region, seed: u64, window: f64) -> Region {
    match sampled_enclosure(&region, seed, window) {
        Some(hull) => region.guarded(hull),
        None => region,
    }
}
