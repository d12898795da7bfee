//! Slab separation of inversion images and the ψ probe.
//!
//! For the canonical two-ball configuration, the inversion image of the
//! inner ball should stay below the image of the outer sphere in the last
//! coordinate, with the extrema attained at the south-pole images. The
//! sampler measures both levels; the ψ probe cross-checks the outer side
//! along tangent-cone directions.

use serde::{Deserialize, Serialize};

use super::sample::SampleStream;
use crate::error::{Error, Result};
use crate::geometry::NormalizedPair;
use crate::map::SmoothMap;
use crate::primitives::{generalized_inversion, InversionParams};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsiSample {
    pub a: f64,
    pub alpha: f64,
    pub value: f64,
    /// ψ(a;α) < r₂², the regime in which the outer extremum stays at the pole.
    pub below_threshold: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlabReport {
    pub a: f64,
    /// sup of xₙ over sampled I(B₁) (boundary and interior).
    pub c1: f64,
    /// inf of xₙ over sampled I(∂B₂) and far-field rays of B₂ᶜ.
    pub c2: f64,
    /// c1 < c2 on the sampled sets.
    pub separated: bool,
    /// The inner extremum is attained at the south-pole image τ′.
    pub c1_at_pole: bool,
    /// The outer extremum is attained at the south-pole image ζ′.
    pub c2_at_pole: bool,
    /// τ′ = I(τ).
    pub pole_image_1: Vec<f64>,
    /// ζ′ = I(ζ).
    pub pole_image_2: Vec<f64>,
    pub psi_samples: Vec<PsiSample>,
    pub seed: u64,
}

/// ψ(a;α) = ((2r₂−r)·cos^{1/a}α − (r₂−r)·cosα)² + (r₂−r)²·sin²α.
///
/// ψ(a;α) = r₂² exactly when the candidate point at angle α whose image
/// height equals ζ′ₙ lies on ∂B₂; values above r₂² mean some boundary point
/// at that angle dips below the pole image.
pub fn psi(a: f64, alpha: f64, r: f64, r2: f64) -> f64 {
    let d = (2.0 * r2 - r) * alpha.cos().powf(1.0 / a);
    let e = (r2 - r) * alpha.cos();
    (d - e) * (d - e) + (r2 - r) * (r2 - r) * alpha.sin() * alpha.sin()
}

/// Evaluate ψ over a grid and flag where it stays below r₂².
pub fn psi_probe(a_grid: &[f64], alpha_grid: &[f64], r: f64, r2: f64) -> Vec<PsiSample> {
    let threshold = r2 * r2;
    let mut out = Vec::with_capacity(a_grid.len() * alpha_grid.len());
    for &a in a_grid {
        for &alpha in alpha_grid {
            let value = psi(a, alpha, r, r2);
            out.push(PsiSample {
                a,
                alpha,
                value,
                below_threshold: value < threshold,
            });
        }
    }
    out
}

/// Default α grid for the ψ probe: interior angles of (0, π/2).
pub fn default_alpha_grid() -> Vec<f64> {
    (1..30)
        .map(|k| k as f64 * std::f64::consts::FRAC_PI_2 / 30.0)
        .collect()
}

/// Measure the separation levels for a normalized pair under `I_{a,r}`.
pub fn slab_separation(
    params: &InversionParams,
    np: &NormalizedPair,
    n_samples: usize,
    seed: u64,
) -> Result<SlabReport> {
    let r = np.tangent_radius;
    if (params.radius - r).abs() > 1e-12 * r.max(1.0) {
        return Err(Error::Hypothesis(format!(
            "inversion radius {} differs from the tangent radius {r}",
            params.radius
        )));
    }
    let a = params.exponent;
    let dim = np.ball1.dim();
    let inv = generalized_inversion(dim, a, r);
    let stream = SampleStream::new(seed);

    let tau_img = inv.eval(&np.south_pole_1);
    let zeta_img = inv.eval(&np.south_pole_2);
    let tau_n = tau_img[dim - 1];
    let zeta_n = zeta_img[dim - 1];

    let last = |m: &SmoothMap, x: &crate::geometry::Point| m.eval(x)[dim - 1];

    // Inner side: boundary and interior of B1. The pole is included so the
    // sup is never below τ′ₙ.
    let mut c1 = tau_n;
    for i in 0..n_samples as u64 {
        let on_sphere = stream.on_sphere(i, &np.ball1.center, np.ball1.radius);
        c1 = c1.max(last(&inv, &on_sphere));
        let inside = stream.in_ball(i + n_samples as u64, &np.ball1.center, np.ball1.radius);
        c1 = c1.max(last(&inv, &inside));
    }

    // Outer side: boundary of B2 plus far-field rays of its complement
    // (far images cluster at 0 and cannot undercut the boundary minimum).
    let mut c2 = zeta_n;
    for i in 0..n_samples as u64 {
        let on_sphere = stream.on_sphere(3 * n_samples as u64 + i, &np.ball2.center, np.ball2.radius);
        c2 = c2.min(last(&inv, &on_sphere));
    }
    for i in 0..(n_samples / 4).max(16) as u64 {
        let dir = stream.direction(5 * n_samples as u64 + i, dim);
        for scale in [1.05, 2.0, 10.0, 100.0] {
            let x = (np.ball2.radius + np.ball2.center.norm()) * scale * &dir;
            if (&x - &np.ball2.center).norm() > np.ball2.radius {
                c2 = c2.min(last(&inv, &x));
            }
        }
    }

    let tol = 1e-9;
    Ok(SlabReport {
        a,
        c1,
        c2,
        separated: c1 < c2,
        c1_at_pole: c1 <= tau_n + tol,
        c2_at_pole: c2 >= zeta_n - tol,
        pole_image_1: tau_img.iter().copied().collect(),
        pole_image_2: zeta_img.iter().copied().collect(),
        psi_samples: psi_probe(&[a], &default_alpha_grid(), r, np.ball2.radius),
        seed,
    })
}

/// Interior slab levels `(a, b)` strictly between measured `c1 < c2`,
/// placed a quarter-gap inside each side.
pub fn slab_levels(report: &SlabReport) -> Result<(f64, f64)> {
    if !report.separated {
        return Err(Error::SeparationFailure {
            a: report.a,
            c1: report.c1,
            c2: report.c2,
        });
    }
    let gap = report.c2 - report.c1;
    Ok((report.c1 + 0.25 * gap, report.c2 - 0.25 * gap))
}
