//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its runtime. Run with
//!
//! ```text
//! cargo test -p collarext --test acceptance -- --nocapture
//! ```
//!
//! Runtime budgets are asserted in optimized non-debug builds only; the
//! numerical tolerances are asserted always.

use std::time::Instant;

use collarext::analysis::{
    agreement_residual_in_box, exponent_check, exponent_check_algebraic, lipschitz_estimate_in_box,
    psi, slab_separation, sobolev_puncture_profile, PunctureGrid, SampleStream, SlabReport,
};
use collarext::extension::{
    build_extension_collar, build_extension_identity, BuildOptions, CollarInput, ExtensionBundle,
    IdentityCaseInput, SigmaClass, SlabSpec,
};
use collarext::geometry::{e_last, normalize_balls, Ball, Point, Region};
use collarext::map::{compose, fd_hessian, identity, SmoothMap};
use collarext::primitives::{
    bump_rotation, generalized_inversion, inversion_envelopes, shear, sphere_bump_rotation,
    sphere_rotation, stereographic, twist_maps, InversionParams, Pole,
};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

fn budget(start: Instant, name: &str, seconds: f64) {
    let elapsed = start.elapsed().as_secs_f64();
    println!("{name}: PASS ({elapsed:.1} s)");
    #[cfg(not(debug_assertions))]
    assert!(
        elapsed < seconds,
        "{name} exceeded its runtime budget: {elapsed:.1} s > {seconds} s"
    );
    #[cfg(debug_assertions)]
    let _ = seconds;
}

// ---------------------------------------------------------------- criterion 1

#[test]
fn criterion_1_shear_suite() {
    let start = Instant::now();
    let s = shear(2, 0.0, 2.0);
    let stream = SampleStream::new(101);
    let lo = DVector::from_vec(vec![-3.0, -4.0]);
    let hi = DVector::from_vec(vec![3.0, 6.0]);

    // Identity below the slab, lattice step above it.
    let mut worst_below = 0.0f64;
    let mut worst_above = 0.0f64;
    let mut n_below = 0;
    let mut n_above = 0;
    let mut idx = 0u64;
    while (n_below < 10_000 || n_above < 10_000) && idx < 200_000 {
        let x = stream.point_in_box(idx, &lo, &hi);
        idx += 1;
        if x[1] < 0.0 && n_below < 10_000 {
            n_below += 1;
            worst_below = worst_below.max((s.eval(&x) - &x).norm());
        } else if x[1] > 2.0 && n_above < 10_000 {
            n_above += 1;
            let shifted = &x - DVector::from_vec(vec![3.0, 0.0]);
            worst_above = worst_above.max((s.eval(&x) - shifted).norm());
        }
    }
    assert_eq!(n_below, 10_000);
    assert_eq!(n_above, 10_000);
    assert!(worst_below <= 1e-12, "identity residual {worst_below:.2e}");
    assert!(worst_above <= 1e-12, "lattice-step residual {worst_above:.2e}");

    // Central differences against the analytic second derivative inside the
    // slab, off the three kink heights (where only the a.e. value exists).
    let mut worst_rel = 0.0f64;
    let mut measured_const = 0.0f64;
    let mut checked = 0;
    let mut idx = 0u64;
    while checked < 2_000 && idx < 100_000 {
        let x = stream.point_in_box(500_000 + idx, &lo, &hi);
        idx += 1;
        let t = x[1];
        if !(0.02 < t && t < 1.98) || (t - 1.0).abs() < 0.02 {
            continue;
        }
        checked += 1;
        let analytic = s.hessian_at(&x).hs_norm();
        measured_const = measured_const.max(analytic);
        let sc = s.clone();
        let fd = fd_hessian(&move |p: &Point| sc.eval(p), &x, 2).hs_norm();
        worst_rel = worst_rel.max((fd - analytic).abs() / analytic);
    }
    assert_eq!(checked, 2_000);
    assert!(worst_rel <= 1e-4, "FD-vs-analytic relative gap {worst_rel:.2e}");
    // c = 1 here: the direct computation gives |D2S| = 3/c^2 a.e.
    assert!((measured_const - 3.0).abs() <= 1e-9);
    let displayed_estimate = 2.0; // the 2/c^2 envelope quoted for this map
    println!(
        "  shear second-derivative constant: measured {measured_const:.12} / c^2, \
         quoted envelope {displayed_estimate} / c^2 (ratio {:.3}; measured value reported, \
         envelope not asserted)",
        measured_const / displayed_estimate
    );

    // Exact operator norm of DS at the slab midline: (3 + sqrt(13))/2.
    let exact = (3.0 + 13.0f64.sqrt()) / 2.0;
    let mid = Region::ball(DVector::from_vec(vec![0.0, 1.0]), 0.05);
    let l = lipschitz_estimate_in_box(
        &s,
        &mid,
        &DVector::from_vec(vec![-0.05, 0.95]),
        &DVector::from_vec(vec![0.05, 1.05]),
        3_000,
        7,
    )
    .unwrap()
    .forward;
    assert!(l >= exact * (1.0 - 1e-3) && l <= exact * (1.0 + 1e-9));

    budget(start, "criterion 1 (shear suite)", 5.0);
}

// ---------------------------------------------------------------- criterion 2

#[test]
fn criterion_2_inversion_suite() {
    let start = Instant::now();
    let dim = 3;
    let r = 1.5f64;
    let stream = SampleStream::new(202);
    for a in [0.25, 0.5, 1.0, 2.0] {
        let fwd = generalized_inversion(dim, a, r);
        let back = fwd.inverse().unwrap();
        let round = compose(&back, &fwd);
        let params = InversionParams::new(a, r).unwrap();

        // Inverse pair on 10^4 annulus samples.
        let mut worst = 0.0f64;
        for i in 0..10_000u64 {
            let t = 0.5 * r + (2.0 * r) * (i as f64 / 10_000.0);
            let x = t * stream.direction(i, dim);
            worst = worst.max((round.eval(&x) - &x).norm());
        }
        assert!(worst <= 1e-10, "a={a}: round trip {worst:.2e}");

        // The sphere |x| = r is fixed pointwise.
        let mut worst_sphere = 0.0f64;
        for i in 0..2_000u64 {
            let x = r * stream.direction(50_000 + i, dim);
            worst_sphere = worst_sphere.max((fwd.eval(&x) - &x).norm());
        }
        assert!(worst_sphere <= 1e-12, "a={a}: sphere residual {worst_sphere:.2e}");

        // Derivative and Jacobian envelopes with fitted constants.
        let n = dim as f64;
        let sharp1 = (n - 1.0 + a * a).sqrt();
        let sharp2 = (a + 1.0) * (a * a + 3.0 * (n - 1.0)).sqrt();
        let mut fitted1 = 0.0f64;
        let mut fitted2 = 0.0f64;
        let mut fitted_j = 0.0f64;
        for i in 0..200u64 {
            let t = 0.4 * r + 2.0 * r * (i as f64 / 200.0);
            let x = t * stream.direction(90_000 + i, dim);
            let env1 = inversion_envelopes(&params, dim, &x, 1).unwrap();
            let env2 = inversion_envelopes(&params, dim, &x, 2).unwrap();
            let dj = fwd.jacobian_at(&x);
            let dh = fwd.hessian_at(&x);
            assert!(dj.norm() <= env1.derivative * (1.0 + 1e-9));
            assert!(dh.hs_norm() <= env2.derivative * (1.0 + 1e-9));
            fitted1 = fitted1.max(dj.norm() / env1.base);
            fitted2 = fitted2.max(dh.hs_norm() / env2.base);
            let det = dj.determinant().abs();
            assert!(det <= env1.jacobian.unwrap() * (1.0 + 1e-9));
            // Exact form a * (r^{a+1} |x|^{-(a+1)})^n.
            let base = r.powf(a + 1.0) * t.powf(-(a + 1.0));
            assert!((det - a * base.powi(dim as i32)).abs() <= 1e-10 * det.max(1e-30));
            fitted_j = fitted_j.max(det / (base.powi(dim as i32)));
            // Cross-check one point per a with central differences.
            if i == 0 {
                let fc = fwd.clone();
                let fd = collarext::map::fd_jacobian(&move |p: &Point| fc.eval(p), &x, dim);
                assert!((fd - dj).amax() < 1e-5);
            }
        }
        assert!((fitted1 - sharp1).abs() <= 1e-9 * sharp1);
        assert!((fitted2 - sharp2).abs() <= 1e-9 * sharp2);
        assert!(fitted_j <= n, "Jacobian constant {fitted_j} above the n envelope");
        if a <= 1.0 {
            assert!(fitted1 <= n);
        }
        println!(
            "  a={a}: fitted |DI| constant {fitted1:.6} (sharp {sharp1:.6}), \
             |D2I| {fitted2:.6} (sharp {sharp2:.6}), JI {fitted_j:.6} <= n"
        );
    }
    budget(start, "criterion 2 (inversion suite)", 10.0);
}

// ---------------------------------------------------------------- criterion 3

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct GoldenSlabRow {
    a: f64,
    c1: f64,
    c2: f64,
    separated: bool,
    c1_at_pole: bool,
    c2_at_pole: bool,
}

/// Desk oracle for the canonical configuration (r1 = 0.5, r2 = 3, r = 1.5,
/// centers at −2eₙ and −1.5eₙ): the extrema of the image height over the
/// boundary spheres reduce by axisymmetry to one-dimensional optimizations
/// over the polar angle, solved by dense scan plus golden-section refinement.
/// Interior points cannot beat the boundary: along each radial ray the image
/// height is monotone in the radius.
fn desk_oracle(a: f64) -> GoldenSlabRow {
    let r: f64 = 1.5;
    let image_height = |center_n: f64, rho: f64, theta: f64| -> f64 {
        let yn = center_n + rho * theta.cos();
        let y2 = center_n * center_n + rho * rho + 2.0 * center_n * rho * theta.cos();
        r.powf(a + 1.0) * y2.powf(-(a + 1.0) / 2.0) * yn
    };
    let optimize = |center_n: f64, rho: f64, maximize: bool| -> f64 {
        let score = |t: f64| {
            let v = image_height(center_n, rho, t);
            if maximize {
                v
            } else {
                -v
            }
        };
        let n = 20_000;
        let mut best_t = 0.0;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=n {
            let t = std::f64::consts::PI * i as f64 / n as f64;
            let v = score(t);
            if v > best {
                best = v;
                best_t = t;
            }
        }
        let span = std::f64::consts::PI / n as f64;
        let (mut lo, mut hi) = ((best_t - span).max(0.0), (best_t + span).min(std::f64::consts::PI));
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        for _ in 0..120 {
            let m1 = hi - phi * (hi - lo);
            let m2 = lo + phi * (hi - lo);
            if score(m1) < score(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let t = 0.5 * (lo + hi);
        image_height(center_n, rho, t)
    };
    let c1 = optimize(-2.0, 0.5, true);
    let c2 = optimize(-1.5, 3.0, false);
    let tau_n = -(r.powf(a + 1.0) * 2.5f64.powf(-a));
    let zeta_n = -(r.powf(a + 1.0) * 4.5f64.powf(-a));
    GoldenSlabRow {
        a,
        c1,
        c2,
        separated: c1 < c2,
        c1_at_pole: c1 <= tau_n + 1e-9,
        c2_at_pole: c2 >= zeta_n - 1e-9,
    }
}

fn sweep_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 / 10.0).collect()
}

fn golden_rows() -> Vec<GoldenSlabRow> {
    serde_json::from_str(include_str!("golden/slab_sweep_golden.json")).expect("golden table")
}

fn canonical_pair(dim: usize) -> collarext::geometry::NormalizedPair {
    let mut c1 = DVector::zeros(dim);
    c1[dim - 1] = -2.0;
    let mut c2 = DVector::zeros(dim);
    c2[dim - 1] = -1.5;
    normalize_balls(
        &Ball::new(c1, 0.5).unwrap(),
        &Ball::new(c2, 3.0).unwrap(),
    )
    .unwrap()
}

/// Regenerates the committed golden table from the desk oracle. Run once,
/// the output is versioned: `cargo test -p collarext --test acceptance
/// regenerate_slab_golden -- --ignored --nocapture`.
#[test]
#[ignore]
fn regenerate_slab_golden() {
    let rows: Vec<GoldenSlabRow> = sweep_grid().iter().map(|&a| desk_oracle(a)).collect();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/slab_sweep_golden.json");
    std::fs::write(path, serde_json::to_string_pretty(&rows).unwrap()).unwrap();
    println!("wrote {path}");
}

#[test]
fn criterion_3_slab_pole_suite() {
    let start = Instant::now();
    let golden = golden_rows();
    assert_eq!(golden.len(), sweep_grid().len());

    // The committed table stays reproducible from the desk oracle.
    for row in &golden {
        let fresh = desk_oracle(row.a);
        assert!((fresh.c1 - row.c1).abs() <= 1e-9);
        assert!((fresh.c2 - row.c2).abs() <= 1e-9);
        assert_eq!(
            (fresh.separated, fresh.c1_at_pole, fresh.c2_at_pole),
            (row.separated, row.c1_at_pole, row.c2_at_pole),
            "oracle drifted at a = {}",
            row.a
        );
    }

    for dim in [2usize, 3] {
        let np = canonical_pair(dim);
        for row in &golden {
            let params = InversionParams::new(row.a, 1.5).unwrap();
            let rep: SlabReport = slab_separation(&params, &np, 4_000, 303).unwrap();

            // Pole comparison holds for every a in the sweep.
            let tau_n = rep.pole_image_1[dim - 1];
            let zeta_n = rep.pole_image_2[dim - 1];
            assert!(tau_n < zeta_n, "pole comparison failed at a = {}", row.a);

            // Sampler flags match the committed desk-oracle table.
            assert_eq!(rep.separated, row.separated, "separated flag at a = {}", row.a);
            assert_eq!(rep.c1_at_pole, row.c1_at_pole, "inner pole flag at a = {}", row.a);
            assert_eq!(rep.c2_at_pole, row.c2_at_pole, "outer pole flag at a = {}", row.a);
            assert!((rep.c1 - row.c1).abs() <= 5e-3, "c1 at a = {}", row.a);
            assert!((rep.c2 - row.c2).abs() <= 5e-3, "c2 at a = {}", row.a);

            // Claims restated testably where the pole flags hold.
            if row.c1_at_pole {
                assert!(rep.c1 <= tau_n + 1e-9);
            }
            if row.c2_at_pole {
                assert!(rep.c2 >= zeta_n - 1e-9);
            }
            // psi-probe consistency along the outer tangent cone.
            let max_psi = rep
                .psi_samples
                .iter()
                .map(|s| s.value)
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(
                max_psi <= 9.0 + 1e-9,
                row.c2_at_pole,
                "psi/pole equivalence at a = {}",
                row.a
            );

            // Hand-derived values at a = 0.5.
            if (row.a - 0.5).abs() < 1e-12 {
                assert!((tau_n + 1.161895003862225).abs() <= 1e-5);
                assert!((zeta_n + 0.8660254037844387).abs() <= 1e-5);
            }
        }
    }

    // psi closed forms: psi(1) = 5.625 < 9 and the a -> 0 limit 2.25 < 9 at
    // alpha = pi/4.
    let alpha = std::f64::consts::FRAC_PI_4;
    assert!((psi(1.0, alpha, 1.5, 3.0) - 5.625).abs() <= 1e-12);
    assert!((psi(1e-8, alpha, 1.5, 3.0) - 2.25).abs() <= 1e-12);

    budget(start, "criterion 3 (slab/pole suite)", 30.0);
}

// ---------------------------------------------------------------- criterion 4

fn identity_case_scenario(dim: usize, bump: bool) -> IdentityCaseInput {
    let hole1 = Region::ball(-0.55 * e_last(dim), 0.12);
    let hole2 = Region::ball(0.55 * e_last(dim), 0.12);
    let g = if bump {
        bump_rotation(dim, 0.55 * e_last(dim), 0.28, 0.7, (0, 1))
    } else {
        identity(dim)
    };
    let image_hole1 = hole1.clone();
    let image_hole2 = if bump {
        Region::preimage(g.inverse().unwrap(), hole2.clone())
    } else {
        hole2.clone()
    };
    IdentityCaseInput {
        g,
        hole1,
        hole2,
        image_hole1,
        image_hole2,
        ball: Ball::unit(dim),
        slab: SlabSpec::axis_aligned(-0.2, 0.2),
    }
}

fn sample_in(region: &Region, lo: &Point, hi: &Point, count: usize, seed: u64) -> Vec<Point> {
    collarext::analysis::sample_region_in_box(region, lo, hi, &SampleStream::new(seed), count, 0.0)
        .unwrap()
}

#[test]
fn criterion_4_identity_case_extension() {
    let start = Instant::now();
    for dim in [2usize, 3] {
        for bump in [true, false] {
            let input = identity_case_scenario(dim, bump);
            let opts = BuildOptions {
                samples: 400,
                k_max: 8,
                ..Default::default()
            };
            let bundle = build_extension_identity(&input, &opts).unwrap();
            let g = &input.g;
            let big_g = &bundle.extension;
            let big_g_inv = &bundle.extension_inv;

            let unit_lo = Point::from_element(dim, -1.0);
            let unit_hi = Point::from_element(dim, 1.0);

            // Agreement sup |G - g| on 10^4 samples of N minus the second hole.
            let region = Region::Difference(
                Box::new(bundle.neighborhood.clone()),
                Box::new(input.hole2.clone()),
            );
            let agree = agreement_residual_in_box(g, big_g, &region, &unit_lo, &unit_hi, 10_000, 404)
                .unwrap();
            assert!(agree <= 1e-9, "dim {dim} bump {bump}: agreement {agree:.2e}");

            // Periodicity among the lattice translates (columns k >= 1 are
            // mutually periodic; the 0-column carries the input agreement).
            let ball_minus_hole = Region::Difference(
                Box::new(Region::Ball(Ball::unit(dim))),
                Box::new(input.hole2.clone()),
            );
            let pts = sample_in(&ball_minus_hole, &unit_lo, &unit_hi, 2_000, 405);
            let step = 3.0 * collarext::geometry::unit_vec(dim, 0);
            let mut worst_periodic = 0.0f64;
            for x in &pts {
                let base = big_g.eval(&(x + &step));
                for k in 2..=6i64 {
                    let off = k as f64 * &step;
                    let lhs = big_g.eval(&(x + &off));
                    let rhs = &base + (k - 1) as f64 * &step;
                    worst_periodic = worst_periodic.max((lhs - rhs).norm());
                }
                // Below the slab preimage the 0-column is periodic too.
                if matches!(
                    collarext::extension::classify_sigma(
                        &bundle.periodicized,
                        bundle.unit_slab.0,
                        bundle.unit_slab.1,
                        x
                    ),
                    Ok(SigmaClass::Below)
                ) {
                    let lhs = big_g.eval(&(x + &step));
                    let rhs = big_g.eval(x) + &step;
                    worst_periodic = worst_periodic.max((lhs - rhs).norm());
                }
            }
            assert!(
                worst_periodic <= 1e-9,
                "dim {dim} bump {bump}: periodicity {worst_periodic:.2e}"
            );

            // G = tau_1 on the below component; G = id on the above component
            // off the second hole (excluding the 0-column unless g = id,
            // where the input agreement takes over).
            let window_lo = {
                let mut v = Point::from_element(dim, -2.5);
                v[0] = -4.0;
                v
            };
            let window_hi = {
                let mut v = Point::from_element(dim, 2.5);
                v[0] = 3.0 * 7.0;
                v
            };
            let below_pts = sample_in(&bundle.below_component, &window_lo, &window_hi, 3_000, 406);
            let mut worst_tau = 0.0f64;
            for x in &below_pts {
                worst_tau = worst_tau.max((big_g.eval(x) - (x + &step)).norm());
            }
            assert!(worst_tau <= 1e-10, "dim {dim} bump {bump}: below-component {worst_tau:.2e}");

            let mut above_region = Region::Difference(
                Box::new(bundle.above_component.clone()),
                Box::new(input.hole2.clone()),
            );
            if bump {
                above_region = Region::Difference(
                    Box::new(above_region),
                    Box::new(Region::ball(Point::zeros(dim), 1.02)),
                );
            }
            let above_pts = sample_in(&above_region, &window_lo, &window_hi, 3_000, 407);
            let mut worst_id = 0.0f64;
            for x in &above_pts {
                worst_id = worst_id.max((big_g.eval(x) - x).norm());
            }
            assert!(worst_id <= 1e-10, "dim {dim} bump {bump}: above-component {worst_id:.2e}");

            // Round trip G(G^{-1}(y)) = y away from dispatch seams.
            let image_region = Region::Difference(
                Box::new(Region::All),
                Box::new(input.image_hole2.clone()),
            );
            let ypts = sample_in(&image_region, &window_lo, &window_hi, 10_000, 408);
            let mut worst_round = 0.0f64;
            let mut used = 0;
            for y in &ypts {
                if big_g_inv.seam_distance(y) < 1e-6 {
                    continue;
                }
                let x = big_g_inv.eval(y);
                if big_g.seam_distance(&x) < 1e-6 {
                    continue;
                }
                used += 1;
                worst_round = worst_round.max((big_g.eval(&x) - y).norm());
            }
            assert!(used > 8_000);
            assert!(worst_round <= 1e-8, "dim {dim} bump {bump}: round trip {worst_round:.2e}");

            // Injectivity on a stratified grid: distinct sample points have
            // distinct images.
            {
                let grid_pts = sample_in(&ball_minus_hole, &window_lo, &window_hi, 800, 411);
                let images: Vec<Point> = grid_pts.iter().map(|x| big_g.eval(x)).collect();
                for i in 0..images.len() {
                    for j in (i + 1)..images.len() {
                        if (&grid_pts[i] - &grid_pts[j]).norm() > 1e-12 {
                            assert!(
                                (&images[i] - &images[j]).norm() > 1e-12,
                                "grid images collide"
                            );
                        }
                    }
                }
            }

            // Uniform derivative bound: sup |DG| over the translates is
            // stable in k.
            let base_pts = sample_in(&ball_minus_hole, &unit_lo, &unit_hi, 500, 409);
            let mut sups = Vec::new();
            for k in 1..=6i64 {
                let off = k as f64 * &step;
                let mut sup = 0.0f64;
                for x in &base_pts {
                    sup = sup.max(big_g.jacobian_at(&(x + &off)).norm());
                }
                sups.push(sup);
            }
            let spread = sups.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - sups.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(
                spread <= 1e-6,
                "dim {dim} bump {bump}: sup|DG| spread across translates {spread:.2e}"
            );

            // Global bi-Lipschitz behavior outside the unit ball: sampled
            // two-sided difference-quotient bounds stay finite.
            let outside = Region::Difference(
                Box::new(Region::All),
                Box::new(Region::ball(Point::zeros(dim), 1.0)),
            );
            let ratios = lipschitz_estimate_in_box(
                big_g,
                &outside,
                &window_lo,
                &window_hi,
                2_000,
                410,
            )
            .unwrap();
            assert!(ratios.forward.is_finite() && ratios.forward < 1e4);
            assert!(ratios.min_forward > 1e-4);
            if bump && dim == 2 {
                println!(
                    "  empirical bi-Lipschitz bounds of G outside the ball: \
                     upper {:.4}, lower {:.6}",
                    ratios.forward, ratios.min_forward
                );
            }
        }
    }
    budget(start, "criterion 4 (identity-case extension)", 120.0);
}

// ---------------------------------------------------------------- criterion 5

fn collar_scenario(dim: usize, p: f64) -> CollarInput {
    let mut c1 = DVector::zeros(dim);
    c1[dim - 1] = -2.0;
    let mut c2 = DVector::zeros(dim);
    c2[dim - 1] = -1.5;
    let b1 = Ball::new(c1.clone(), 0.5).unwrap();
    let b2 = Ball::new(c2.clone(), 3.0).unwrap();
    // Domain collar: a similarity copy (scale 2, shifted); f is the
    // similarity carrying it back onto the image collar.
    let lam = 2.0;
    let shift = DVector::from_element(dim, 0.3);
    let d1 = Ball::new(lam * &c1 + &shift, lam * 0.5).unwrap();
    let d2 = Ball::new(lam * &c2 + &shift, lam * 3.0).unwrap();
    let f = compose(
        &collarext::map::dilation(dim, 1.0 / lam),
        &collarext::map::translation(&(-&shift)),
    );
    CollarInput {
        f,
        domain1: d1.region(),
        domain2: d2.region(),
        image_ball1: b1,
        image_ball2: b2,
        exponent: p,
    }
}

fn build_collar(p: f64, a_override: Option<f64>) -> ExtensionBundle {
    let opts = BuildOptions {
        samples: 400,
        k_max: 8,
        inversion_exponent: a_override,
        ..Default::default()
    };
    build_extension_collar(&collar_scenario(3, p), &opts).unwrap()
}

fn puncture_hints(bundle: &ExtensionBundle, a: f64, r: f64) -> PunctureGrid {
    // Measured band center: slab midline pulled back through the inversion.
    let (lo, hi) = bundle.unit_slab;
    let r_h = 1.0 / bundle.frame.scale;
    let c_mid = 0.5 * (lo + hi).abs() * r_h;
    PunctureGrid {
        band_slope: a,
        band_log_center: (c_mid / r.powf(a + 1.0)).ln(),
        half_width: 2.5,
    }
}

#[test]
fn criterion_5_collar_pipeline() {
    let start = Instant::now();
    let r = 1.5f64;
    let n = 3.0f64;
    let stream = SampleStream::new(505);

    for p in [1.0, 1.5, 2.0] {
        let bundle = build_collar(p, None);
        let a = (0.5f64).min(0.9 * (n / p - 1.0));
        let f_hat = bundle.extension_prepared.as_ref().unwrap();

        // F(0) = 0 in the prepared frame.
        assert_eq!(f_hat.eval(&Point::zeros(3)).norm(), 0.0);

        // Agreement with the input near the outer boundary, in original
        // coordinates (the builder already verified this at 1e-8; re-verify
        // with a 10^4-sample budget).
        {
            let input = collar_scenario(3, p);
            let collar = Region::Difference(
                Box::new(input.domain2.clone()),
                Box::new(input.domain1.clone()),
            );
            let prep = collarext::map::from_similarity(bundle.domain_prep.as_ref().unwrap());
            let mut sup = 0.0f64;
            let mut used = 0usize;
            let mut idx = 0u64;
            while used < 10_000 && idx < 2_000_000 {
                let x = prep.eval(&(1.8 * r * stream.direction(idx, 3)));
                idx += 1;
                if bundle.neighborhood.contains(&x) && collar.contains(&x) {
                    used += 1;
                    sup = sup.max((bundle.extension.eval(&x) - input.f.eval(&x)).norm());
                }
            }
            assert!(used == 10_000, "p={p}: only {used} boundary samples");
            assert!(sup <= 1e-8, "p={p}: boundary agreement {sup:.2e}");
        }

        // |DF| stays bounded along the shells |x| = 1e-2..1e-6, and the
        // far-field ratio |I(x)|/|(G o I)(x)| converges within 5% of its
        // limiting value.
        let inv = bundle.inversion.as_ref().unwrap();
        let mut shell_sup = Vec::new();
        let mut shell_ratio = Vec::new();
        for k in 2..=6 {
            let s = 10f64.powi(-k);
            let mut sup_df = 0.0f64;
            let mut ratio_sum = 0.0f64;
            for i in 0..100u64 {
                let x = s * stream.direction(10_000 + 100 * k as u64 + i, 3);
                sup_df = sup_df.max(f_hat.jacobian_at(&x).norm());
                let y_norm = inv.eval(&x).norm();
                let z_norm = inv.eval(&f_hat.eval(&x)).norm();
                ratio_sum += y_norm / z_norm;
            }
            shell_sup.push(sup_df);
            shell_ratio.push(ratio_sum / 100.0);
        }
        let earlier_max = shell_sup[..shell_sup.len() - 1]
            .iter()
            .cloned()
            .fold(0.0f64, f64::max);
        assert!(
            *shell_sup.last().unwrap() <= 1.1 * earlier_max.max(1.0),
            "p={p}: |DF| grows toward the puncture: {shell_sup:?}"
        );
        let l_limit = *shell_ratio.last().unwrap();
        let prev = shell_ratio[shell_ratio.len() - 2];
        assert!(
            (prev / l_limit - 1.0).abs() <= 0.05,
            "p={p}: ratio not settled: {shell_ratio:?}"
        );
        println!(
            "  p={p}: limiting far-field ratio L = {l_limit:.5}, deepest sup|DF| = {:.4}",
            shell_sup.last().unwrap()
        );

        // Quadrature refinement for the second-derivative integral near the
        // puncture is Cauchy (within 2% between the last two levels).
        let grid = puncture_hints(&bundle, a, r);
        let seq = sobolev_puncture_profile(f_hat, &Point::zeros(3), 1e-6, p, 6, &grid).unwrap();
        let last = seq[seq.len() - 1].estimate;
        let prev = seq[seq.len() - 2].estimate;
        let gap = ((prev - last) / last).abs();
        assert!(gap <= 0.02, "p={p}: refinement gap {gap:.4}: {seq:?}");
        println!(
            "  p={p} (a={a:.2}): integral estimate {last:.6e}, final refinement gap {:.2}%",
            gap * 100.0
        );
    }

    // Divergence probe: an exponent above the integrability threshold makes
    // the same refinement sequence grow without settling.
    {
        let a = 1.6;
        let bundle = build_collar(2.0, Some(a));
        let f_hat = bundle.extension_prepared.as_ref().unwrap();
        let grid = puncture_hints(&bundle, a, r);
        let seq = sobolev_puncture_profile(f_hat, &Point::zeros(3), 1e-6, 2.0, 6, &grid).unwrap();
        for w in seq.windows(2).skip(2) {
            let growth = w[1].estimate / w[0].estimate;
            assert!(
                growth >= 1.10,
                "divergence probe grew only {growth:.3}x: {seq:?}"
            );
        }
        println!(
            "  divergence probe (p=2, a={a}): level growth {:.2}x per level",
            seq[seq.len() - 1].estimate / seq[seq.len() - 2].estimate
        );
    }

    budget(start, "criterion 5 (collar pipeline)", 300.0);
}

// ---------------------------------------------------------------- criterion 6

#[test]
fn criterion_6_exponent_identity() {
    let start = Instant::now();
    let mut checked = 0u64;
    for n in 2..=8u32 {
        let mut p = 1.0f64;
        while p < n as f64 {
            let mut k = 1;
            while k <= 60 {
                let a = k as f64 * 0.05;
                assert_eq!(
                    exponent_check(n, p, a),
                    exponent_check_algebraic(n, p, a),
                    "mismatch at n={n}, p={p}, a={a}"
                );
                checked += 1;
                k += 1;
            }
            p += 0.25;
        }
    }
    println!("  exponent identity verified on {checked} grid points, zero mismatches");
    budget(start, "criterion 6 (exponent identity)", 1.0);
}

// ---------------------------------------------------------------- criterion 7

#[test]
fn criterion_7_twist_and_chart_suite() {
    let start = Instant::now();
    for dim in [3usize, 7] {
        let id_star = generalized_inversion(dim, 1.0, 1.0);
        let stream = SampleStream::new(707);

        let phis: Vec<(&str, SmoothMap)> = vec![
            ("identity", identity(dim)),
            ("rotation", sphere_rotation(dim, (0, 1), 0.8)),
            (
                "bump-rotation restriction",
                sphere_bump_rotation(dim, (0, 1), 0.6, 0.8),
            ),
        ];
        for (name, phi) in &phis {
            let pair = twist_maps(phi).unwrap();
            let lhs = compose(&id_star, &pair.star);
            let mut worst = 0.0f64;
            for i in 0..1_000u64 {
                let x = (0.2 + 3.0 * (i as f64 / 1_000.0)) * stream.direction(i, dim);
                worst = worst.max((lhs.eval(&x) - pair.bar.eval(&x)).norm());
            }
            assert!(worst <= 1e-12, "dim {dim}, phi = {name}: untwist residual {worst:.2e}");

            if *name == "identity" {
                // phi = id gives the classical inversion up to roundoff.
                let mut worst_inv = 0.0f64;
                for i in 0..1_000u64 {
                    let x = (0.3 + 2.0 * (i as f64 / 1_000.0)) * stream.direction(5_000 + i, dim);
                    let expect = &x / x.norm_squared();
                    let rel = (pair.star.eval(&x) - &expect).norm() / expect.norm();
                    worst_inv = worst_inv.max(rel);
                }
                assert!(worst_inv <= 4.0 * f64::EPSILON);
            }
        }

        // Chart transition pi_2^{-1} o pi_1 = id* on sampled points.
        let pi1 = stereographic(dim, Pole::North);
        let pi2_inv = stereographic(dim, Pole::South).inverse().unwrap();
        let transition = compose(&pi2_inv, &pi1);
        let mut worst = 0.0f64;
        for i in 0..1_000u64 {
            let x = (0.05 + 4.0 * (i as f64 / 1_000.0)) * stream.direction(20_000 + i, dim);
            worst = worst.max((transition.eval(&x) - id_star.eval(&x)).norm());
        }
        assert!(worst <= 1e-12, "dim {dim}: chart transition residual {worst:.2e}");
    }
    budget(start, "criterion 7 (twist & chart suite)", 5.0);
}
