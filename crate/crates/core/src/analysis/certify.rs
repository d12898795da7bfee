//! Regularity-class certification: Lipschitz stability over a compact
//! exhaustion, second-derivative quadrature for the map and its inverse, and
//! inverse round-trips. Numerical evidence, not proof.

use serde::Serialize;

use super::estimators::{lipschitz_estimate_with, PairwiseRatios};
use super::sample::{sample_region, SampleStream};
use super::sobolev::{final_refinement_gap, sobolev_seminorm_in_box, LevelEstimate};
use crate::error::{Error, Result};
use crate::geometry::{Point, Region};
use crate::map::SmoothMap;

#[derive(Clone, Debug, Serialize)]
pub struct CheckFlag {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub map_id: String,
    pub lipschitz_lower: f64,
    pub lipschitz_inverse_lower: f64,
    pub sobolev_seq: Vec<LevelEstimate>,
    pub sobolev_inverse_seq: Vec<LevelEstimate>,
    pub agreement_sup: f64,
    pub flags: Vec<CheckFlag>,
    pub seed: u64,
}

impl RegularityReport {
    pub fn all_pass(&self) -> bool {
        self.flags.iter().all(|f| f.pass)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CertifyOptions {
    pub n_pairs: usize,
    pub n_samples: usize,
    pub levels: u32,
    pub seed: u64,
    /// Inverse round-trip tolerance.
    pub inverse_tol: f64,
    /// Relative gap required between the last two quadrature levels.
    pub cauchy_gap: f64,
    /// Ratio between exhaustion levels above which the Lipschitz estimate is
    /// flagged as unstable (blow-up toward the boundary or a puncture).
    pub stability_factor: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            n_pairs: 800,
            n_samples: 1000,
            levels: 5,
            seed: 0xC0FFEE,
            inverse_tol: 1e-9,
            cauchy_gap: 0.02,
            stability_factor: 10.0,
        }
    }
}

fn exhaustion_estimate(
    m: &SmoothMap,
    region: &Region,
    n_pairs: usize,
    seed: u64,
    boundary_margin: f64,
    singular_margin: f64,
) -> Result<PairwiseRatios> {
    // Carve the singular neighborhood out of the region so the pair sampler
    // stays on the current compactum of the exhaustion.
    let sd = singular_margin;
    let mc = m.clone();
    let carved = Region::Intersection(vec![
        region.clone(),
        Region::Preimage {
            map: SmoothMap::builder("singular-gauge", m.dim_in(), 1)
                .eval(move |x| nalgebra::DVector::from_element(1, mc.singular_distance(x).min(1e300)))
                .build(),
            target: Box::new(Region::HalfSpace {
                normal: nalgebra::DVector::from_element(1, 1.0),
                offset: sd,
            }),
            singular_inside: false,
        },
    ]);
    let mut ratios = lipschitz_estimate_with(m, &carved, n_pairs, seed, boundary_margin)?;

    // Probe the inner shell of the compactum explicitly: walk down the
    // singular-distance gauge to just above the exclusion radius and take
    // local difference quotients there. Uniform samples almost never land
    // near a point singularity, so without this the exhaustion cannot see a
    // puncture blow-up.
    let stream = SampleStream::new(seed ^ 0x5107);
    if let Ok(start_pts) = sample_region(region, &stream, 8, boundary_margin) {
        let start = start_pts
            .iter()
            .min_by(|a, b| {
                m.singular_distance(a)
                    .partial_cmp(&m.singular_distance(b))
                    .unwrap()
            })
            .cloned();
        if let Some(start) = start {
            if m.singular_distance(&start).is_finite() {
                let shell = approach_singular(m, region, start, 1.5 * singular_margin, boundary_margin);
                let dim = shell.len();
                for (k, delta) in super::estimators::NEAR_DIAGONAL_OFFSETS.iter().enumerate() {
                    let dir = stream.direction(900 + k as u64, dim);
                    let y = &shell + *delta * dir;
                    if carved.margin(&y) > 0.0 && carved.margin(&shell) > 0.0 {
                        let q = (m.eval(&y) - m.eval(&shell)).norm() / *delta;
                        if q > ratios.forward {
                            ratios.forward = q;
                        }
                    }
                }
            }
        }
    }
    Ok(ratios)
}

/// Gradient descent on the singular-distance gauge, stopping at `target`
/// distance or at the region boundary.
fn approach_singular(
    m: &SmoothMap,
    region: &Region,
    mut x: crate::geometry::Point,
    target: f64,
    boundary_margin: f64,
) -> crate::geometry::Point {
    let dim = x.len();
    for _ in 0..128 {
        let d = m.singular_distance(&x);
        if !d.is_finite() || d <= target {
            break;
        }
        let h = 1e-6 * x.norm().max(1.0);
        let mut grad = crate::geometry::Point::zeros(dim);
        for i in 0..dim {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            grad[i] = (m.singular_distance(&xp) - m.singular_distance(&xm)) / (2.0 * h);
        }
        let n = grad.norm();
        if n < 1e-12 {
            break;
        }
        let step = (d - target).min(0.5 * d);
        let cand = &x - (step / n) * grad;
        if region.margin(&cand) <= boundary_margin {
            break;
        }
        x = cand;
    }
    x
}

/// Certify that `m` behaves like a locally bi-Lipschitz homeomorphism with
/// p-integrable second derivatives on the region: finite stable Lipschitz
/// estimates both ways, Cauchy quadrature sequences, and tight inverse
/// round-trips.
pub fn certify_lw(
    m: &SmoothMap,
    region: &Region,
    p: f64,
    opts: &CertifyOptions,
) -> Result<RegularityReport> {
    let inverse = m.inverse()?;
    let (lo, hi) = region
        .bounding_box()
        .ok_or_else(|| Error::Sampling("certification region needs a bounding box".into()))?;
    let scale = (&hi - &lo).norm();

    // Compact exhaustion: estimates over compacta that stay away from the
    // region boundary and from the map's singular set, then again with the
    // exclusions tightened. A large jump signals a Lipschitz blow-up toward
    // a puncture or the boundary.
    let loose = exhaustion_estimate(m, region, opts.n_pairs, opts.seed, 0.02 * scale, 0.05 * scale)?;
    let tight = exhaustion_estimate(
        m,
        region,
        opts.n_pairs,
        opts.seed ^ 0x9E37,
        0.002 * scale,
        0.005 * scale,
    )?;
    let lipschitz_lower = loose.forward.max(tight.forward);
    let lipschitz_inverse_lower = loose.inverse.max(tight.inverse);
    let stable = tight.forward <= opts.stability_factor * loose.forward;

    // Inverse round-trip on interior samples.
    let stream = SampleStream::new(opts.seed.wrapping_add(1));
    let pts = sample_region(region, &stream, opts.n_samples, 0.002 * scale)?;
    let mut round_trip = 0.0f64;
    let mut image_lo = Point::from_element(lo.len(), f64::INFINITY);
    let mut image_hi = Point::from_element(lo.len(), f64::NEG_INFINITY);
    for x in &pts {
        if m.is_singular_at(x) {
            continue;
        }
        let y = m.eval(x);
        for i in 0..y.len() {
            image_lo[i] = image_lo[i].min(y[i]);
            image_hi[i] = image_hi[i].max(y[i]);
        }
        round_trip = round_trip.max((inverse.eval(&y) - x).norm());
    }

    let sobolev_seq = sobolev_seminorm_in_box(m, region, &lo, &hi, p, opts.levels)?;
    // The inverse is integrated over the sampled image box.
    let image_region = Region::preimage(inverse.clone(), region.clone());
    let sobolev_inverse_seq =
        sobolev_seminorm_in_box(&inverse, &image_region, &image_lo, &image_hi, p, opts.levels)?;

    let gap_fwd = final_refinement_gap(&sobolev_seq).unwrap_or(0.0);
    let gap_inv = final_refinement_gap(&sobolev_inverse_seq).unwrap_or(0.0);

    let flags = vec![
        CheckFlag {
            name: "lipschitz_finite".into(),
            pass: lipschitz_lower.is_finite() && lipschitz_inverse_lower.is_finite(),
            measured: lipschitz_lower,
        },
        CheckFlag {
            name: "lipschitz_stable".into(),
            pass: stable,
            measured: tight.forward / loose.forward.max(1e-300),
        },
        CheckFlag {
            name: "inverse_round_trip".into(),
            pass: round_trip <= opts.inverse_tol,
            measured: round_trip,
        },
        CheckFlag {
            name: "sobolev_cauchy".into(),
            pass: gap_fwd <= opts.cauchy_gap,
            measured: gap_fwd,
        },
        CheckFlag {
            name: "sobolev_inverse_cauchy".into(),
            pass: gap_inv <= opts.cauchy_gap,
            measured: gap_inv,
        },
    ];

    Ok(RegularityReport {
        map_id: m.name().to_string(),
        lipschitz_lower,
        lipschitz_inverse_lower,
        sobolev_seq,
        sobolev_inverse_seq,
        agreement_sup: round_trip,
        flags,
        seed: opts.seed,
    })
}
