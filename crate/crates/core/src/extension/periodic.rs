//! Periodicization: replicate a compactly supported homeomorphism along the
//! lattice of ball translates, identity elsewhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{sphere_dir, unit_vec, Ball, Region};
use crate::map::{compose, glue_with, identity, translation, GlueOptions, PiecewiseMap, SmoothMap};

/// Build `g* = τ_k ∘ g ∘ τ_{−k}` on the k-th ball translate for
/// `k = 0..=k_max`, identity elsewhere, with verified seams. The lattice
/// step is `3·radius·e₁`, so consecutive translates keep a gap of one
/// radius. Requires `g` to agree with the identity near the ball boundary.
pub fn periodicize(g: &SmoothMap, ball: &Ball, k_max: i64, seam_tol: f64, seed: u64) -> Result<PiecewiseMap> {
    let dim = g.dim_in();
    assert_eq!(dim, ball.dim(), "dimension mismatch");

    // The hypothesis: g = id on and just inside the ball boundary.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
    let mut worst = 0.0f64;
    for i in 0..256 {
        let t = 0.96 + 0.08 * (i as f64 / 255.0);
        let x = &ball.center + ball.radius * t * sphere_dir(&mut rng, dim);
        worst = worst.max((g.eval(&x) - &x).norm());
    }
    let scale = ball.radius.max(1.0);
    if worst > seam_tol.min(1e-10) * scale {
        return Err(Error::SeamMismatch {
            gap: worst,
            tolerance: seam_tol.min(1e-10) * scale,
            point: Vec::new(),
        });
    }

    let step = 3.0 * ball.radius * unit_vec(dim, 0);
    let mut branches: Vec<(Region, SmoothMap)> = Vec::with_capacity(k_max as usize + 2);
    for k in 0..=k_max {
        let offset = k as f64 * &step;
        let region = Region::Ball(Ball {
            center: &ball.center + &offset,
            radius: ball.radius,
        });
        let map = if k == 0 {
            g.clone()
        } else {
            compose(&translation(&offset), &compose(g, &translation(&(-offset))))
        };
        branches.push((region, map));
    }
    branches.push((Region::All, identity(dim)));

    glue_with(
        branches,
        seam_tol,
        &GlueOptions {
            seed,
            samples_per_branch: 48,
            window: 3.0 * ball.radius * (k_max as f64 + 2.0),
        },
    )
}
