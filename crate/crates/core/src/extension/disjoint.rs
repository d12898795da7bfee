//! Doubly-punctured case: a radial stretch conjugation reduces an arbitrary
//! puncture-pair map to the identity case.
//!
//! Given `g` mapping the complement of two disjoint Jordan holes onto the
//! complement of two disjoint image balls, the pipeline normalizes the
//! domain so the second hole surrounds the origin, builds a radial stretch R
//! whose conjugate `h = g ∘ R ∘ g⁻¹` fixes everything outside a ball, runs
//! the identity case on `h⁻¹`, and assembles `G = H ∘ g ∘ R`.

use super::{
    inscribed_radius, next_power_of_two, push_check, require_check, sampled_outer_radius,
    zeros, BuildOptions, ExtensionBundle,
};
use crate::analysis::{sample_region, sample_region_in_box, SampleStream};
use crate::error::{Error, Result};
use crate::geometry::{e_last, rotation_between, Ball, Point, Region, Similarity};
use crate::map::{compose, from_similarity, SmoothMap};
use crate::primitives::{radial_stretch, RadialProfile};

pub fn build_extension_disjoint(
    g: &SmoothMap,
    hole1: &Region,
    hole2: &Region,
    image_ball1: &Ball,
    image_ball2: &Ball,
    p: f64,
    opts: &BuildOptions,
) -> Result<ExtensionBundle> {
    let dim = g.dim_in();
    if !(p >= 1.0) {
        return Err(Error::Hypothesis(format!("integrability exponent p >= 1 required, got {p}")));
    }
    let center_gap = (&image_ball2.center - &image_ball1.center).norm();
    if center_gap <= image_ball1.radius + image_ball2.radius {
        return Err(Error::InvalidGeometry(
            "image balls must have disjoint closures".into(),
        ));
    }
    let mut checks = Vec::new();

    // Domain normalization: translate an interior point of the second hole
    // to the origin and scale both holes into B(0, 0.45).
    let stream = SampleStream::new(opts.seed ^ 0xd15);
    let inner_pts = sample_region(hole2, &stream, 32, 0.0)?;
    let anchor = inner_pts
        .iter()
        .max_by(|a, b| hole2.margin(a).partial_cmp(&hole2.margin(b)).unwrap())
        .cloned()
        .ok_or_else(|| Error::Sampling("no interior point of the second hole".into()))?;
    let span1 = sampled_outer_radius(hole1, &anchor, opts.seed ^ 1, 128, 4.0)?;
    let span2 = sampled_outer_radius(hole2, &anchor, opts.seed ^ 2, 128, 4.0)?;
    let scale = 0.45 / span1.max(span2);
    let prep = Similarity {
        rotation: nalgebra::DMatrix::identity(dim, dim),
        shift: -scale * &anchor,
        scale,
    };
    let prep_map = from_similarity(&prep);
    let prep_inv = prep_map.inverse()?;
    let g_n = compose(g, &prep_inv);
    let g_n_inv = g_n.inverse()?;
    let hole1_n = Region::preimage(prep_inv.clone(), hole1.clone());
    let hole2_n = Region::preimage(prep_inv.clone(), hole2.clone());

    // Radial stretch in the unit ball: B(0, r1) onto B(0, r2) with
    // B(0, r1) inside the second hole and both holes inside B(0, r2).
    let origin = zeros(dim);
    let r1 = 0.9 * inscribed_radius(&hole2_n, &origin, 0.6, opts.seed ^ 3)?;
    let outer = sampled_outer_radius(&hole1_n, &origin, opts.seed ^ 4, 96, 2.0)?
        .max(sampled_outer_radius(&hole2_n, &origin, opts.seed ^ 5, 96, 2.0)?);
    let r2 = (outer / 0.9).min(0.6);
    let profile = RadialProfile::new(r1, r2)?;
    let stretch = radial_stretch(dim, profile);
    let stretch_inv = stretch.inverse()?;

    // Ball outside which the conjugate h = g ∘ R ∘ g⁻¹ is the identity: it
    // must swallow the image balls and the image of the stretch ball.
    let image_extent = (image_ball1.center.norm() + image_ball1.radius)
        .max(image_ball2.center.norm() + image_ball2.radius);
    let mut reach = image_extent.max(1.0);
    for i in 0..128u64 {
        let x = stream.direction(100 + i, dim);
        reach = reach.max(g_n.eval(&x).norm());
    }
    let r_h = next_power_of_two(1.25 * reach);

    let h = compose(&g_n, &compose(&stretch, &g_n_inv));
    let u = h.inverse()?;

    // h is the identity outside B(0, r_h); sample an annulus to confirm.
    let mut id_residual = 0.0f64;
    for i in 0..opts.samples as u64 {
        let t = 1.0 + 0.4 * (i as f64 / opts.samples.max(1) as f64);
        let x = r_h * t * stream.direction(300 + i, dim);
        id_residual = id_residual.max((h.eval(&x) - &x).norm());
    }
    push_check(
        &mut checks,
        "conjugated_identity_outside_ball",
        id_residual,
        1e-10 * r_h.max(1.0),
    );

    // Holes of the identity-case input u = h⁻¹: preimages of the normalized
    // holes under W = R⁻¹ ∘ g⁻¹.
    let w_map = compose(&stretch_inv, &g_n_inv);
    let hole1_prime = Region::preimage(w_map.clone(), hole1_n.clone());
    let hole2_prime = Region::preimage(w_map.clone(), hole2_n.clone());

    // Slab between the image balls, rotated onto the last axis.
    let axis = (&image_ball2.center - &image_ball1.center) / center_gap;
    let rotation = rotation_between(&axis, &e_last(dim));
    let c1_rot = (&rotation * &image_ball1.center)[dim - 1];
    let c2_rot = (&rotation * &image_ball2.center)[dim - 1];
    let top1 = c1_rot + image_ball1.radius;
    let bot2 = c2_rot - image_ball2.radius;
    let gap = bot2 - top1;
    let slab = super::SlabSpec {
        rotation: Some(rotation),
        low: top1 + 0.25 * gap,
        high: bot2 - 0.25 * gap,
    };

    let input = super::IdentityCaseInput {
        g: u.clone(),
        hole1: hole1_prime,
        hole2: hole2_prime.clone(),
        image_hole1: image_ball1.region(),
        image_hole2: image_ball2.region(),
        ball: Ball {
            center: zeros(dim),
            radius: r_h,
        },
        slab,
    };
    let inner = super::build_extension_identity(&input, opts)?;

    // Assemble G = H ∘ g ∘ R (in original domain coordinates) and its
    // agreement neighborhood.
    let forward = compose(&g_n, &compose(&stretch, &prep_map));
    let extension = compose(&inner.extension, &forward);
    let extension_inv = extension.inverse()?;

    let neighborhood = Region::preimage(
        forward.clone(),
        Region::Difference(
            Box::new(inner.neighborhood.clone()),
            Box::new(hole2_prime),
        ),
    );

    // The extension agrees with g near the second hole boundary.
    {
        let sample_in = Region::Difference(Box::new(neighborhood.clone()), Box::new(hole2.clone()));
        let (lo, hi) = hole2
            .bounding_box()
            .map(|(lo, hi)| inflate_box(lo, hi, 1.6))
            .ok_or_else(|| Error::Sampling("second hole needs a bounding box".into()))?;
        let pts = sample_region_in_box(
            &sample_in,
            &lo,
            &hi,
            &SampleStream::new(opts.seed ^ 0xa9ee2),
            opts.samples,
            0.0,
        )?;
        let mut sup = 0.0f64;
        for x in &pts {
            sup = sup.max((extension.eval(x) - g.eval(x)).norm());
        }
        push_check(&mut checks, "agreement_outer", sup, 1e-8);
    }

    checks.extend(inner.checks.iter().cloned());
    require_check(&checks)?;

    Ok(ExtensionBundle {
        extension,
        extension_inv,
        neighborhood,
        shear: inner.shear,
        periodicized: inner.periodicized,
        periodicized_inv: inner.periodicized_inv,
        core: inner.core,
        periodic_complement: inner.periodic_complement,
        slab_preimage: inner.slab_preimage,
        below_component: inner.below_component,
        above_component: inner.above_component,
        frame: inner.frame,
        unit_slab: inner.unit_slab,
        k_max: inner.k_max,
        stretch: Some(stretch),
        conjugated: Some(h),
        inner_extension: Some(inner.extension),
        inversion: None,
        stretch_conjugate: None,
        extension_conjugate: None,
        domain_prep: Some(prep),
        image_prep: None,
        extension_prepared: None,
        checks,
    })
}

fn inflate_box(lo: Point, hi: Point, factor: f64) -> (Point, Point) {
    let mid = (&lo + &hi) * 0.5;
    let half = (&hi - &lo) * 0.5 * factor;
    (&mid - &half, &mid + &half)
}
