//! Identity-case extension: the input agrees with the identity outside a
//! ball and its image holes are separated by a slab. The extension is
//! `τ₁ ∘ g*⁻¹ ∘ S ∘ g*` on the periodic complement, the lattice step on the
//! first-hole translates, and the identity on the second-hole translates.

use nalgebra::DMatrix;

use super::{push_check, require_check, BuildOptions, ExtensionBundle};
use crate::analysis::{sample_region_in_box, SampleStream};
use crate::error::{Error, Result};
use crate::geometry::{e_last, unit_vec, Ball, Point, Region, Similarity, SEAM_TOL};
use crate::map::{compose, glue_with, identity, translation, GlueOptions, SmoothMap};
use crate::primitives::shear;

/// Slab `{low < (Θx)ₙ < high}` separating the image holes, with an optional
/// rotation aligning it to the last axis.
#[derive(Clone, Debug)]
pub struct SlabSpec {
    pub rotation: Option<DMatrix<f64>>,
    pub low: f64,
    pub high: f64,
}

impl SlabSpec {
    pub fn axis_aligned(low: f64, high: f64) -> Self {
        SlabSpec {
            rotation: None,
            low,
            high,
        }
    }
}

/// Input data for the identity case: `g` maps the complement of the two
/// domain holes onto the complement of the two image holes, fixes everything
/// outside `ball` (which contains both domain holes), and the image holes
/// are separated by the slab.
#[derive(Clone)]
pub struct IdentityCaseInput {
    pub g: SmoothMap,
    pub hole1: Region,
    pub hole2: Region,
    pub image_hole1: Region,
    pub image_hole2: Region,
    pub ball: Ball,
    pub slab: SlabSpec,
}

/// Position of a point relative to the slab preimage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaClass {
    Below,
    Slab,
    Above,
}

/// Classify by thresholding the last coordinate of `g*(x)` against the slab
/// levels; within `SEAM_TOL` of a level the call refuses to decide.
pub fn classify_sigma(g_star: &SmoothMap, a: f64, b: f64, x: &Point) -> Result<SigmaClass> {
    let n = g_star.dim_out();
    let v = g_star.eval(x)[n - 1];
    if (v - a).abs() <= SEAM_TOL || (v - b).abs() <= SEAM_TOL {
        return Err(Error::BoundaryUndecidable { tolerance: SEAM_TOL });
    }
    Ok(if v < a {
        SigmaClass::Below
    } else if v > b {
        SigmaClass::Above
    } else {
        SigmaClass::Slab
    })
}

pub fn build_extension_identity(
    input: &IdentityCaseInput,
    opts: &BuildOptions,
) -> Result<ExtensionBundle> {
    let dim = input.g.dim_in();
    let mut checks = Vec::new();

    // Conjugate everything to the unit frame: ball -> unit ball, slab axis
    // -> last coordinate axis.
    let rotation = input
        .slab
        .rotation
        .clone()
        .unwrap_or_else(|| DMatrix::identity(dim, dim));
    let frame = Similarity {
        shift: -(&rotation * &input.ball.center) / input.ball.radius,
        rotation,
        scale: 1.0 / input.ball.radius,
    };
    let trivial_frame = input.ball.radius == 1.0
        && input.ball.center.norm() == 0.0
        && input.slab.rotation.is_none();
    let frame_map = crate::map::from_similarity(&frame);
    let frame_inv = frame_map.inverse()?;

    let g_hat = if trivial_frame {
        input.g.clone()
    } else {
        compose(&frame_map, &compose(&input.g, &frame_inv))
    };
    let transport = |r: &Region| -> Region {
        if trivial_frame {
            r.clone()
        } else {
            Region::preimage(frame_inv.clone(), r.clone())
        }
    };
    // Guard the transported holes with sampled enclosing balls so that the
    // piecewise dispatch over hole translates stays cheap away from them.
    let hole1 = super::guard_region(transport(&input.hole1), opts.seed ^ 0x41, 2.0);
    let hole2 = super::guard_region(transport(&input.hole2), opts.seed ^ 0x42, 2.0);
    let image_hole1 = super::guard_region(transport(&input.image_hole1), opts.seed ^ 0x43, 2.0);
    let image_hole2 = super::guard_region(transport(&input.image_hole2), opts.seed ^ 0x44, 2.0);
    let rc = &frame.rotation * &input.ball.center;
    let a = (input.slab.low - rc[dim - 1]) / input.ball.radius;
    let b = (input.slab.high - rc[dim - 1]) / input.ball.radius;
    if !(a < b) {
        return Err(Error::Hypothesis(format!(
            "slab levels collapse after normalization: a={a}, b={b}"
        )));
    }

    // Hypothesis: g = id outside the ball (sampled on an annulus).
    let stream = SampleStream::new(opts.seed);
    let mut id_residual = 0.0f64;
    for i in 0..opts.samples as u64 {
        let t = 1.0 + 0.6 * (i as f64 / opts.samples.max(1) as f64);
        let x = t * stream.direction(i, dim);
        id_residual = id_residual.max((g_hat.eval(&x) - &x).norm());
    }
    push_check(&mut checks, "identity_outside_ball", id_residual, opts.id_tol);

    // Hypothesis: image holes on the correct sides of the slab.
    {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed ^ 0x1dea);
        let b1 = image_hole1.sample_boundary(&mut rng, 64, 2.0);
        let b2 = image_hole2.sample_boundary(&mut rng, 64, 2.0);
        if !b1.is_empty() {
            let hi = b1.iter().map(|p| p[dim - 1]).fold(f64::NEG_INFINITY, f64::max);
            push_check(&mut checks, "image_hole1_below_slab", hi - a, 0.0);
        }
        if !b2.is_empty() {
            let lo = b2.iter().map(|p| p[dim - 1]).fold(f64::INFINITY, f64::min);
            push_check(&mut checks, "image_hole2_above_slab", b - lo, 0.0);
        }
    }

    // The shear and the periodicized input.
    let s = shear(dim, a, b);
    let s_inv = s.inverse()?;
    let unit_ball = Ball::unit(dim);
    let g_star_pw = super::periodicize(&g_hat, &unit_ball, opts.k_max, opts.seam_tol, opts.seed)?;
    let g_hat_inv = g_hat.inverse()?;
    let g_star_inv_pw =
        super::periodicize(&g_hat_inv, &unit_ball, opts.k_max, opts.seam_tol, opts.seed ^ 1)?;
    let g_star_plain = g_star_pw.to_map(Region::All, None);
    let g_star_inv = g_star_inv_pw.to_map(Region::All, Some(g_star_plain.clone()));
    let g_star = g_star_pw.to_map(Region::All, Some(g_star_inv.clone()));

    let tau = |k: i64| translation(&(3.0 * k as f64 * unit_vec(dim, 0)));

    // Core composite τ₁ ∘ g*⁻¹ ∘ S ∘ g* and its inverse.
    let core = compose(&tau(1), &compose(&g_star_inv, &compose(&s, &g_star)));
    let core_inv = compose(
        &g_star_inv,
        &compose(&s_inv, &compose(&g_star, &tau(-1))),
    );

    // Case list of the extension; first matching region dispatches, the
    // periodic complement is the fall-through.
    let translated = |r: &Region, k: i64| r.translated(&(3.0 * k as f64 * unit_vec(dim, 0)));
    let window = 3.0 * (opts.k_max as f64 + 2.0);
    let glue_opts = GlueOptions {
        seed: opts.seed ^ 0x91e,
        samples_per_branch: 24,
        window,
    };

    let mut branches = Vec::new();
    for k in 0..=opts.k_max {
        branches.push((translated(&hole1, k), tau(1)));
    }
    for k in 1..=opts.k_max {
        branches.push((translated(&hole2, k), identity(dim)));
    }
    branches.push((Region::All, core.clone()));
    let g_ext_pw = glue_with(branches, opts.seam_tol, &glue_opts)?;

    let mut inv_branches = Vec::new();
    for k in 1..=(opts.k_max + 1) {
        inv_branches.push((translated(&hole1, k), tau(-1)));
    }
    for k in 1..=opts.k_max {
        inv_branches.push((translated(&hole2, k), identity(dim)));
    }
    inv_branches.push((Region::All, core_inv.clone()));
    let g_ext_inv_pw = glue_with(inv_branches, opts.seam_tol, &glue_opts)?;

    let ext_domain = Region::Difference(Box::new(Region::All), Box::new(hole2.clone()));
    let ext_image_domain = Region::Difference(Box::new(Region::All), Box::new(image_hole2.clone()));
    let g_ext_plain = g_ext_pw.to_map(ext_domain.clone(), None);
    let g_ext_inv = g_ext_inv_pw.to_map(ext_image_domain, Some(g_ext_plain.clone()));
    let g_ext = g_ext_pw.to_map(ext_domain, Some(g_ext_inv.clone()));

    // Round trip G ∘ G⁻¹ = id away from seams.
    {
        let lo = Point::from_fn(dim, |i, _| if i == 0 { -3.5 } else { -2.5 });
        let hi = Point::from_fn(dim, |i, _| {
            if i == 0 {
                3.0 * (opts.k_max.min(3) as f64) + 2.0
            } else {
                2.5
            }
        });
        let sample_domain = Region::Difference(
            Box::new(Region::All),
            Box::new(image_hole2.clone()),
        );
        let pts = sample_region_in_box(
            &sample_domain,
            &lo,
            &hi,
            &SampleStream::new(opts.seed ^ 0xf00d),
            opts.samples,
            0.0,
        )?;
        let mut worst = 0.0f64;
        for y in &pts {
            if g_ext_inv.seam_distance(y) < 1e-6 {
                continue;
            }
            let x = g_ext_inv.eval(y);
            if g_ext.seam_distance(&x) < 1e-6 {
                continue;
            }
            worst = worst.max((g_ext.eval(&x) - y).norm());
        }
        push_check(&mut checks, "inverse_round_trip", worst, opts.inverse_tol);
    }

    // Sigma regions and the agreement neighborhood N = B ∩ σ_above.
    let slab_region = Region::Slab {
        normal: e_last(dim),
        low: a,
        high: b,
    };
    let slab_preimage = Region::preimage(g_star.clone(), slab_region);
    let mut above_parts = vec![Region::preimage(
        g_star.clone(),
        Region::half_space_above(dim, dim - 1, b),
    )];
    let mut below_parts = vec![Region::preimage(
        g_star.clone(),
        Region::half_space_below(dim, dim - 1, a),
    )];
    for k in 0..=opts.k_max {
        above_parts.push(translated(&hole2, k));
        below_parts.push(translated(&hole1, k));
    }
    let above = Region::Union(above_parts);
    let below = Region::Union(below_parts);
    let mut hole_translates = Vec::new();
    for k in 0..=opts.k_max {
        hole_translates.push(translated(&hole1, k));
        hole_translates.push(translated(&hole2, k));
    }
    let periodic_complement = Region::Difference(
        Box::new(Region::All),
        Box::new(Region::Union(hole_translates)),
    );
    let neighborhood_hat = Region::Intersection(vec![
        Region::Ball(unit_ball.clone()),
        above.clone(),
    ]);

    // Agreement G = g on N minus the second hole.
    {
        let region = Region::Difference(
            Box::new(neighborhood_hat.clone()),
            Box::new(hole2.clone()),
        );
        let lo = Point::from_element(dim, -1.0);
        let hi = Point::from_element(dim, 1.0);
        let pts = sample_region_in_box(
            &region,
            &lo,
            &hi,
            &SampleStream::new(opts.seed ^ 0xa97ee),
            opts.samples,
            0.0,
        )?;
        let mut sup = 0.0f64;
        for x in &pts {
            sup = sup.max((g_ext.eval(x) - g_hat.eval(x)).norm());
        }
        push_check(&mut checks, "agreement_on_neighborhood", sup, opts.agree_tol);
    }

    // Lattice periodicity of the extension across the translate window.
    // Translates k >= 1 are mutually periodic; the 0-column is special
    // because the extension agrees with the input there instead of with the
    // conjugated tail, so the reference column is k = 1.
    {
        let region = Region::Difference(
            Box::new(Region::Ball(unit_ball.clone())),
            Box::new(hole2.clone()),
        );
        let lo = Point::from_element(dim, -1.0);
        let hi = Point::from_element(dim, 1.0);
        let pts = sample_region_in_box(
            &region,
            &lo,
            &hi,
            &SampleStream::new(opts.seed ^ 0x9e10d1c),
            (opts.samples / 2).max(64),
            1e-6,
        )?;
        let step = 3.0 * unit_vec(dim, 0);
        let mut worst = 0.0f64;
        for x in &pts {
            let base = g_ext.eval(&(x + &step));
            for k in 2..=opts.k_max.min(6) {
                let off = k as f64 * &step;
                let lhs = g_ext.eval(&(x + &off));
                let rhs = &base + (k - 1) as f64 * &step;
                worst = worst.max((lhs - rhs).norm());
            }
        }
        push_check(&mut checks, "periodicity", worst, 1e-9);
    }

    // Transport the result back to the caller frame.
    let (extension, extension_inv, neighborhood, omega, slab_pre, below_r, above_r) =
        if trivial_frame {
            (
                g_ext,
                g_ext_inv,
                neighborhood_hat,
                periodic_complement,
                slab_preimage,
                below,
                above,
            )
        } else {
            let back = |m: &SmoothMap| compose(&frame_inv, &compose(m, &frame_map));
            let pull = |r: &Region| Region::preimage(frame_map.clone(), r.clone());
            (
                back(&g_ext),
                back(&g_ext_inv),
                pull(&neighborhood_hat),
                pull(&periodic_complement),
                pull(&slab_preimage),
                pull(&below),
                pull(&above),
            )
        };

    require_check(&checks)?;
    Ok(ExtensionBundle {
        extension,
        extension_inv,
        neighborhood,
        shear: s,
        periodicized: g_star,
        periodicized_inv: g_star_inv,
        core,
        periodic_complement: omega,
        slab_preimage: slab_pre,
        below_component: below_r,
        above_component: above_r,
        frame,
        unit_slab: (a, b),
        k_max: opts.k_max,
        stretch: None,
        conjugated: None,
        inner_extension: None,
        inversion: None,
        stretch_conjugate: None,
        extension_conjugate: None,
        domain_prep: None,
        image_prep: None,
        extension_prepared: None,
        checks,
    })
}
