//! Sampled Lipschitz lower bounds and agreement residuals.

use super::sample::{sample_region, sample_region_in_box, SampleStream};
use crate::error::{Error, Result};
use crate::geometry::{Point, Region};
use crate::map::SmoothMap;

/// Offsets used for the near-diagonal difference quotients.
pub const NEAR_DIAGONAL_OFFSETS: [f64; 2] = [1e-3, 1e-5];

/// Sampled lower bound for the Lipschitz constant of `m` on a bounded
/// region: the maximum difference quotient over `n_pairs` seeded random
/// pairs plus near-diagonal pairs at offsets 1e−3 and 1e−5.
pub fn lipschitz_estimate(
    m: &SmoothMap,
    region: &Region,
    n_pairs: usize,
    seed: u64,
) -> Result<f64> {
    lipschitz_estimate_with(m, region, n_pairs, seed, 0.0).map(|r| r.forward)
}

/// Both directions at once: difference quotients of the map and, from the
/// same point pairs, of its inverse (the reciprocal quotients).
#[derive(Clone, Copy, Debug)]
pub struct PairwiseRatios {
    pub forward: f64,
    /// max |x−y| / |m(x)−m(y)|, a lower bound for L(m⁻¹) on the image.
    pub inverse: f64,
    /// smallest forward quotient seen (lower bi-Lipschitz witness).
    pub min_forward: f64,
}

pub fn lipschitz_estimate_with(
    m: &SmoothMap,
    region: &Region,
    n_pairs: usize,
    seed: u64,
    min_margin: f64,
) -> Result<PairwiseRatios> {
    let stream = SampleStream::new(seed);
    let pts = sample_region(region, &stream, 2 * n_pairs, min_margin)?;
    ratios_over(m, region, &pts, &stream, min_margin)
}

pub fn lipschitz_estimate_in_box(
    m: &SmoothMap,
    region: &Region,
    lo: &Point,
    hi: &Point,
    n_pairs: usize,
    seed: u64,
) -> Result<PairwiseRatios> {
    let stream = SampleStream::new(seed);
    let pts = sample_region_in_box(region, lo, hi, &stream, 2 * n_pairs, 0.0)?;
    ratios_over(m, region, &pts, &stream, 0.0)
}

fn ratios_over(
    m: &SmoothMap,
    region: &Region,
    pts: &[Point],
    stream: &SampleStream,
    min_margin: f64,
) -> Result<PairwiseRatios> {
    let mut forward = 0.0f64;
    let mut inverse = 0.0f64;
    let mut min_forward = f64::INFINITY;
    let mut consider = |x: &Point, y: &Point| {
        let dx = (x - y).norm();
        if dx < 1e-14 {
            return;
        }
        let dy = (m.eval(x) - m.eval(y)).norm();
        let q = dy / dx;
        if q > forward {
            forward = q;
        }
        if q < min_forward {
            min_forward = q;
        }
        if dy > 1e-300 {
            let r = dx / dy;
            if r > inverse {
                inverse = r;
            }
        }
    };

    for pair in pts.chunks_exact(2) {
        consider(&pair[0], &pair[1]);
    }
    // Near-diagonal pairs probe the local behavior around every sample.
    let dim = pts[0].len();
    for (i, x) in pts.iter().enumerate() {
        for (k, delta) in NEAR_DIAGONAL_OFFSETS.iter().enumerate() {
            let dir = stream.direction(u64::MAX / 2 + (i * 2 + k) as u64, dim);
            let y = x + *delta * dir;
            if region.margin(&y) > min_margin {
                consider(x, &y);
            }
        }
    }
    if !forward.is_finite() || min_forward == f64::INFINITY {
        return Err(Error::Sampling("no usable pairs for difference quotients".into()));
    }
    Ok(PairwiseRatios {
        forward,
        inverse,
        min_forward,
    })
}

/// Sup of |F(x) − f(x)| over seeded samples of the region.
pub fn agreement_residual(
    f: &SmoothMap,
    big_f: &SmoothMap,
    region: &Region,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    let stream = SampleStream::new(seed);
    let pts = sample_region(region, &stream, n_samples, 0.0)?;
    agreement_over(f, big_f, &pts)
}

pub fn agreement_residual_in_box(
    f: &SmoothMap,
    big_f: &SmoothMap,
    region: &Region,
    lo: &Point,
    hi: &Point,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    let stream = SampleStream::new(seed);
    let pts = sample_region_in_box(region, lo, hi, &stream, n_samples, 0.0)?;
    agreement_over(f, big_f, &pts)
}

fn agreement_over(f: &SmoothMap, big_f: &SmoothMap, pts: &[Point]) -> Result<f64> {
    if pts.is_empty() {
        return Err(Error::Sampling("empty sample set for agreement residual".into()));
    }
    let mut sup = 0.0f64;
    for x in pts {
        let d = (big_f.eval(x) - f.eval(x)).norm();
        if d > sup {
            sup = d;
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Ball;
    use crate::map::{compose, dilation, identity, translation};
    use crate::primitives::shear;
    use nalgebra::dvector;

    #[test]
    fn identity_and_dilation_constants() {
        let region = Region::Ball(Ball::unit(2));
        let l = lipschitz_estimate(&identity(2), &region, 300, 7).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
        let l2 = lipschitz_estimate(&dilation(2, 2.0), &region, 300, 7).unwrap();
        assert!((l2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn shear_midline_operator_norm() {
        // Exact operator norm of DS at the slab midline for c = 1:
        // (3 + sqrt(13))/2.
        let s = shear(2, 0.0, 2.0);
        let region = Region::ball(dvector![0.0, 1.0], 0.05);
        let l = lipschitz_estimate(&s, &region, 4000, 11).unwrap();
        let exact = (3.0 + 13.0_f64.sqrt()) / 2.0;
        assert!(l >= exact * (1.0 - 1e-3), "measured {l}, exact {exact}");
        assert!(l <= exact * (1.0 + 1e-6));
    }

    #[test]
    fn product_of_forward_and_inverse_bounds_is_at_least_one() {
        let region = Region::Ball(Ball::unit(2));
        let m = compose(&shear(2, -0.5, 0.5), &dilation(2, 1.5));
        let r = lipschitz_estimate_with(&m, &region, 500, 3, 0.0).unwrap();
        assert!(r.forward * r.inverse >= 1.0 - 1e-12);
    }

    #[test]
    fn agreement_measures_translation_gap_exactly() {
        let region = Region::Ball(Ball::unit(3));
        let delta = 1e-4;
        let f = identity(3);
        let g = compose(&translation(&dvector![delta, 0.0, 0.0]), &identity(3));
        let sup = agreement_residual(&f, &g, &region, 200, 5).unwrap();
        assert!((sup - delta).abs() < 1e-9 * delta);
        let zero = agreement_residual(&f, &f, &region, 200, 5).unwrap();
        assert_eq!(zero, 0.0);
    }
}
