//! Deterministic counter-based sampling.
//!
//! Every sample is a pure function of (seed, index): each index gets its own
//! ChaCha stream, so results are independent of evaluation order and worker
//! count, and reruns with the same seed are bit-identical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{sphere_dir, Point, Region};

#[derive(Clone, Copy, Debug)]
pub struct SampleStream {
    pub seed: u64,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        SampleStream { seed }
    }

    pub fn rng_at(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Uniform point in a box, keyed by index.
    pub fn point_in_box(&self, index: u64, lo: &Point, hi: &Point) -> Point {
        let mut rng = self.rng_at(index);
        Point::from_fn(lo.len(), |i, _| lo[i] + (hi[i] - lo[i]) * rng.gen::<f64>())
    }

    /// Uniform direction, keyed by index.
    pub fn direction(&self, index: u64, dim: usize) -> Point {
        let mut rng = self.rng_at(index);
        sphere_dir(&mut rng, dim)
    }

    /// Point on a sphere, keyed by index.
    pub fn on_sphere(&self, index: u64, center: &Point, radius: f64) -> Point {
        center + radius * self.direction(index, center.len())
    }

    /// Uniform point in a ball (direction + radius with the correct density).
    pub fn in_ball(&self, index: u64, center: &Point, radius: f64) -> Point {
        let dim = center.len();
        let mut rng = self.rng_at(index);
        let dir = sphere_dir(&mut rng, dim);
        let t: f64 = rng.gen::<f64>().powf(1.0 / dim as f64);
        center + radius * t * dir
    }
}

/// Rejection-sample `count` points of a region with margin above `min_margin`.
/// Attempt indices drive the stream, so the output is reproducible and
/// independent of acceptance history.
pub fn sample_region(
    region: &Region,
    stream: &SampleStream,
    count: usize,
    min_margin: f64,
) -> Result<Vec<Point>> {
    let (lo, hi) = region.bounding_box().ok_or_else(|| {
        Error::Sampling("region has no derivable bounding box; sample within an explicit box".into())
    })?;
    sample_region_in_box(region, &lo, &hi, stream, count, min_margin)
}

pub fn sample_region_in_box(
    region: &Region,
    lo: &Point,
    hi: &Point,
    stream: &SampleStream,
    count: usize,
    min_margin: f64,
) -> Result<Vec<Point>> {
    let max_attempts = (count as u64).saturating_mul(2000).max(10_000);
    let mut out = Vec::with_capacity(count);
    let mut index = 0u64;
    while out.len() < count && index < max_attempts {
        let x = stream.point_in_box(index, lo, hi);
        index += 1;
        if region.margin(&x) > min_margin {
            out.push(x);
        }
    }
    if out.len() < count {
        return Err(Error::Sampling(format!(
            "accepted only {} of {count} requested samples after {max_attempts} attempts",
            out.len()
        )));
    }
    Ok(out)
}

/// Compensated (Kahan) summation; sequential reduction keeps quadrature
/// results independent of any parallel partitioning upstream.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}
