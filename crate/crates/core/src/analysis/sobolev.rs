//! Midpoint-rule quadrature of |D²m|ᵖ on dyadic grid refinements.
//!
//! Cells whose centers fall inside the map's seam-exclusion band or on a
//! singular point are dropped with their measure accounted, so piecewise
//! maps are integrated over the classical-smoothness set.

use serde::Serialize;

use super::sample::KahanSum;
use crate::error::{Error, Result};
use crate::geometry::{Point, Region, SEAM_TOL};
use crate::map::SmoothMap;

/// One refinement level of the quadrature sequence.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LevelEstimate {
    pub level: u32,
    /// Midpoint-rule value of ∫ |D²m|ᵖ over the region minus exclusions.
    pub estimate: f64,
    /// Total measure of the excluded (seam-band or singular) cells.
    pub excluded_measure: f64,
    pub cells_used: u64,
}

/// Quadrature over each dyadic level `1..=levels` (grid 2^L per axis).
/// The region must carry a bounding box; otherwise use
/// [`sobolev_seminorm_in_box`].
pub fn sobolev_seminorm(
    m: &SmoothMap,
    region: &Region,
    p: f64,
    levels: u32,
) -> Result<Vec<LevelEstimate>> {
    let (lo, hi) = region.bounding_box().ok_or_else(|| {
        Error::Sampling("region has no derivable bounding box for quadrature".into())
    })?;
    sobolev_seminorm_in_box(m, region, &lo, &hi, p, levels)
}

pub fn sobolev_seminorm_in_box(
    m: &SmoothMap,
    region: &Region,
    lo: &Point,
    hi: &Point,
    p: f64,
    levels: u32,
) -> Result<Vec<LevelEstimate>> {
    if p < 1.0 {
        return Err(Error::Hypothesis(format!("integrability exponent p >= 1 required, got {p}")));
    }
    let dim = lo.len();
    let mut out = Vec::with_capacity(levels as usize);
    for level in 1..=levels {
        let cells_per_axis: u64 = 1 << level;
        let total = cells_per_axis.pow(dim as u32);
        if total > 40_000_000 {
            return Err(Error::Sampling(format!(
                "quadrature level {level} needs {total} cells in dimension {dim}"
            )));
        }
        out.push(quadrature_level(m, region, lo, hi, p, level, cells_per_axis)?);
    }
    Ok(out)
}

fn quadrature_level(
    m: &SmoothMap,
    region: &Region,
    lo: &Point,
    hi: &Point,
    p: f64,
    level: u32,
    cells_per_axis: u64,
) -> Result<LevelEstimate> {
    let dim = lo.len();
    let widths: Vec<f64> = (0..dim)
        .map(|i| (hi[i] - lo[i]) / cells_per_axis as f64)
        .collect();
    let cell_vol: f64 = widths.iter().product();
    let band = 2.0 * SEAM_TOL;

    let total = cells_per_axis.pow(dim as u32);
    let mut sum = KahanSum::default();
    let mut excluded = 0.0f64;
    let mut used = 0u64;
    let mut center = Point::zeros(dim);
    for idx in 0..total {
        let mut rem = idx;
        for i in 0..dim {
            let k = rem % cells_per_axis;
            rem /= cells_per_axis;
            center[i] = lo[i] + (k as f64 + 0.5) * widths[i];
        }
        if !(region.margin(&center) > 0.0) {
            continue;
        }
        if m.is_singular_at(&center) || m.seam_distance(&center) < band {
            excluded += cell_vol;
            continue;
        }
        let h = m.hessian_at(&center).hs_norm();
        sum.add(h.powf(p) * cell_vol);
        used += 1;
    }
    Ok(LevelEstimate {
        level,
        estimate: sum.value(),
        excluded_measure: excluded,
        cells_used: used,
    })
}

/// Coordinate hints for the puncture-profile grid: structures pulled back
/// through a generalized inversion toward a puncture sit near
/// `ln|z| = band_slope·ln|x| + band_log_center` in (log-radius, log-polar)
/// coordinates (z the southern polar cosine). The grid follows that band
/// with a fine transverse window of the given log half-width; the hints
/// steer only where the fine cells go, never the measure accounting.
#[derive(Clone, Copy, Debug)]
pub struct PunctureGrid {
    pub band_slope: f64,
    pub band_log_center: f64,
    pub half_width: f64,
}

impl Default for PunctureGrid {
    fn default() -> Self {
        PunctureGrid {
            band_slope: 0.0,
            band_log_center: 0.0,
            half_width: 2.5,
        }
    }
}

/// Quadrature sequence for the puncture profile of ∫ |D²m|ᵖ near `center`:
/// level L integrates over the annulus `{r_outer·4^{−L} < |x−center| <
/// r_outer}` with a midpoint rule on a dyadically refined grid in
/// log-spherical coordinates. The inner exclusion shrinks with the level, so
/// a second derivative that is not p-integrable at the puncture shows up as
/// unbounded growth across levels, while an integrable one yields a Cauchy
/// sequence. Excluded (singular or seam-band) measure is reported per level.
/// Dimensions 2 and 3.
pub fn sobolev_puncture_profile(
    m: &SmoothMap,
    center: &Point,
    r_outer: f64,
    p: f64,
    levels: u32,
    grid: &PunctureGrid,
) -> Result<Vec<LevelEstimate>> {
    let dim = center.len();
    if dim != 2 && dim != 3 {
        return Err(Error::Sampling(format!(
            "puncture profile quadrature supports dimensions 2 and 3, got {dim}"
        )));
    }
    if p < 1.0 {
        return Err(Error::Hypothesis(format!("integrability exponent p >= 1 required, got {p}")));
    }
    let mut out = Vec::with_capacity(levels as usize);
    let band = 2.0 * SEAM_TOL;
    let t_hi = r_outer.ln();
    let golden = 0.618_033_988_749_894_9_f64;
    for level in 1..=levels {
        let cells: u64 = 1 << level;
        let t_lo = t_hi - level as f64 * 4.0f64.ln();
        let mut sum = KahanSum::default();
        let mut excluded = (-((dim as f64) * (t_hi - t_lo))).exp() * ball_volume(dim, r_outer);
        let mut used = 0u64;
        let mut point = Point::zeros(dim);

        if dim == 2 {
            let n_t = cells;
            let dt = (t_hi - t_lo) / n_t as f64;
            let n_phi = cells * 4;
            let dphi = std::f64::consts::TAU / n_phi as f64;
            for it in 0..n_t {
                let t = t_lo + (it as f64 + 0.5) * dt;
                let radius = t.exp();
                let metric_radial = (2.0 * t).exp() * dt;
                for ip in 0..n_phi {
                    let phi = (ip as f64 + 0.5) * dphi;
                    point[0] = center[0] + radius * phi.cos();
                    point[1] = center[1] + radius * phi.sin();
                    let w = metric_radial * dphi;
                    accumulate(m, &point, p, w, band, &mut sum, &mut excluded, &mut used);
                }
            }
            out.push(LevelEstimate {
                level,
                estimate: sum.value(),
                excluded_measure: excluded,
                cells_used: used,
            });
            continue;
        }

        // n = 3. Radial cells are uniform in t = ln|x|; the southern polar
        // coordinate w = ln(-z) concentrates its cells in a window following
        // the predicted band, with coarse cells covering the rest of the
        // hemisphere and four linear cells covering the north.
        let n_t = cells * 2;
        let dt = (t_hi - t_lo) / n_t as f64;
        let n_fine = cells * 8;
        let n_coarse = cells * 2;
        let n_north = 4u64;
        let dz_north = 1.0 / n_north as f64;
        let n_phi = 4u64;
        let dphi = std::f64::consts::TAU / n_phi as f64;
        let w_floor = (grid.band_slope.max(1.0) * t_lo + grid.band_log_center).min(t_lo) - 3.0;

        for it in 0..n_t {
            let t = t_lo + (it as f64 + 0.5) * dt;
            let radius = t.exp();
            let metric_radial = (3.0 * t).exp() * dt;
            let w_mid = grid.band_slope * t + grid.band_log_center;
            let w_minus = (w_mid - grid.half_width).clamp(w_floor, 0.0);
            let w_plus = (w_mid + grid.half_width).clamp(w_floor, 0.0);
            // Partition [w_floor, 0] into coarse | fine | coarse segments.
            let segments = [
                (w_floor, w_minus, n_coarse),
                (w_minus, w_plus, n_fine),
                (w_plus, 0.0, n_coarse),
            ];
            for ip in 0..n_phi {
                let phi = (ip as f64 + 0.5) * dphi;
                let (cp, sp) = (phi.cos(), phi.sin());
                let shift = (golden * (it as f64 + 1.0) + golden * golden * (ip as f64 + 1.0)).fract();
                for (w_a, w_b, n_w) in segments {
                    if w_b <= w_a {
                        continue;
                    }
                    let dw = (w_b - w_a) / n_w as f64;
                    for iw in 0..n_w {
                        let w = w_a + (iw as f64 + shift) * dw;
                        let z = -w.exp();
                        let weight = metric_radial * w.exp() * dw * dphi;
                        if weight == 0.0 {
                            continue;
                        }
                        let rho = (1.0 - z * z).max(0.0).sqrt();
                        point[0] = center[0] + radius * rho * cp;
                        point[1] = center[1] + radius * rho * sp;
                        point[2] = center[2] + radius * z;
                        accumulate(m, &point, p, weight, band, &mut sum, &mut excluded, &mut used);
                    }
                }
                for iz in 0..n_north {
                    let z = (iz as f64 + 0.5) * dz_north;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    point[0] = center[0] + radius * rho * cp;
                    point[1] = center[1] + radius * rho * sp;
                    point[2] = center[2] + radius * z;
                    let weight = metric_radial * dz_north * dphi;
                    accumulate(m, &point, p, weight, band, &mut sum, &mut excluded, &mut used);
                }
            }
            // Southern sliver below the w-floor, counted as excluded.
            excluded += w_floor.exp() * metric_radial * std::f64::consts::TAU;
        }
        out.push(LevelEstimate {
            level,
            estimate: sum.value(),
            excluded_measure: excluded,
            cells_used: used,
        });
    }
    Ok(out)
}

fn ball_volume(dim: usize, r: f64) -> f64 {
    match dim {
        2 => std::f64::consts::PI * r * r,
        3 => 4.0 / 3.0 * std::f64::consts::PI * r * r * r,
        _ => unreachable!(),
    }
}

fn accumulate(
    m: &SmoothMap,
    x: &Point,
    p: f64,
    weight: f64,
    band: f64,
    sum: &mut KahanSum,
    excluded: &mut f64,
    used: &mut u64,
) {
    if m.is_singular_at(x) || m.seam_distance(x) < band {
        *excluded += weight;
        return;
    }
    let h = m.hessian_at(x).hs_norm();
    sum.add(h.powf(p) * weight);
    *used += 1;
}

/// Relative gap between the last two refinement levels.
pub fn final_refinement_gap(seq: &[LevelEstimate]) -> Option<f64> {
    if seq.len() < 2 {
        return None;
    }
    let a = seq[seq.len() - 2].estimate;
    let b = seq[seq.len() - 1].estimate;
    if b == 0.0 {
        return Some((a - b).abs());
    }
    Some(((a - b) / b).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Ball;
    use crate::map::identity;
    use crate::primitives::{generalized_inversion, shear};
    use nalgebra::dvector;

    #[test]
    fn identity_has_zero_seminorm() {
        let region = Region::Ball(Ball::unit(2));
        let seq = sobolev_seminorm(&identity(2), &region, 2.0, 4).unwrap();
        assert!(seq.iter().all(|l| l.estimate == 0.0));
    }

    #[test]
    fn shear_constant_density_integrates_to_closed_form() {
        // |D²S| = 3 on the slab for c = 1, so over the box [0,1]×[0,2] the
        // integral of |D²S|^p is 3^p · 2.
        let s = shear(2, 0.0, 2.0);
        let region = Region::Intersection(vec![
            Region::Slab {
                normal: dvector![1.0, 0.0],
                low: 0.0,
                high: 1.0,
            },
            Region::Slab {
                normal: dvector![0.0, 1.0],
                low: 0.0,
                high: 2.0,
            },
        ]);
        let lo = dvector![0.0, 0.0];
        let hi = dvector![1.0, 2.0];
        for p in [1.0, 2.0] {
            let seq = sobolev_seminorm_in_box(&s, &region, &lo, &hi, p, 6).unwrap();
            let last = seq.last().unwrap().estimate;
            let expect = 3.0_f64.powf(p) * 2.0;
            assert!(
                (last - expect).abs() < 1e-6 * expect,
                "p={p}: estimate {last}, closed form {expect}"
            );
        }
    }

    #[test]
    fn smooth_integrand_refines_to_cauchy_and_known_value() {
        // For the classical planar inversion, |D²I| = 4|x|^{-3}; over the
        // annulus 1 <= |x| <= 2 the integral at p = 1 is 4π.
        let inv = generalized_inversion(2, 1.0, 1.0);
        let region = Region::Difference(
            Box::new(Region::ball(dvector![0.0, 0.0], 2.0)),
            Box::new(Region::ball(dvector![0.0, 0.0], 1.0)),
        );
        let seq = sobolev_seminorm(&inv, &region, 1.0, 7).unwrap();
        let gap = final_refinement_gap(&seq).unwrap();
        assert!(gap < 0.02, "refinement gap {gap}");
        let expect = 4.0 * std::f64::consts::PI;
        let last = seq.last().unwrap().estimate;
        assert!(
            (last - expect).abs() < 0.02 * expect,
            "estimate {last} vs {expect}"
        );
    }

    #[test]
    fn monotone_under_region_inclusion() {
        let inv = generalized_inversion(2, 0.5, 1.0);
        let small = Region::Difference(
            Box::new(Region::ball(dvector![0.0, 0.0], 1.8)),
            Box::new(Region::ball(dvector![0.0, 0.0], 1.0)),
        );
        let big = Region::Difference(
            Box::new(Region::ball(dvector![0.0, 0.0], 2.5)),
            Box::new(Region::ball(dvector![0.0, 0.0], 0.8)),
        );
        let a = sobolev_seminorm(&inv, &small, 1.5, 6).unwrap();
        let b = sobolev_seminorm(&inv, &big, 1.5, 6).unwrap();
        let ea = a.last().unwrap().estimate;
        let eb = b.last().unwrap().estimate;
        assert!(ea <= eb * 1.01, "inclusion monotonicity: {ea} vs {eb}");
    }
}
