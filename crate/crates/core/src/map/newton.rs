//! Damped Newton iteration for numeric map inversion.
//!
//! Solves `m(x) = y` with step halving and a coarse multi-start grid over the
//! map's bounding box. The target point itself is always the first start,
//! which makes near-identity maps converge immediately.

use nalgebra::DVector;

use super::SmoothMap;
use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Clone, Debug)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Residual |m(x) − y| at which iteration stops.
    pub target: f64,
    /// Residual below which a solution is accepted.
    pub accept: f64,
    /// Multi-start grid bounds; the target point is always tried first.
    pub bbox: Option<(Point, Point)>,
    pub grid_per_axis: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iter: 64,
            target: 1e-13,
            accept: 1e-10,
            bbox: None,
            grid_per_axis: 3,
        }
    }
}

impl NewtonOptions {
    pub fn with_bbox(lo: Point, hi: Point) -> Self {
        NewtonOptions {
            bbox: Some((lo, hi)),
            ..Default::default()
        }
    }
}

pub fn invert(map: &SmoothMap, y: &Point, opts: &NewtonOptions) -> Result<Point> {
    let mut starts: Vec<Point> = vec![y.clone()];
    if let Some((lo, hi)) = &opts.bbox {
        starts.extend(grid_points(lo, hi, opts.grid_per_axis));
    } else if let Some((lo, hi)) = map.domain().bounding_box() {
        starts.extend(grid_points(&lo, &hi, opts.grid_per_axis));
    }

    let mut best_residual = f64::INFINITY;
    let mut best: Option<Point> = None;
    let n_starts = starts.len();
    for x0 in starts {
        if map.is_singular_at(&x0) {
            continue;
        }
        if let Some((x, res)) = run_from(map, y, x0, opts) {
            if res < best_residual {
                best_residual = res;
                best = Some(x);
            }
            if best_residual <= opts.target {
                break;
            }
        }
    }
    match best {
        Some(x) if best_residual <= opts.accept => Ok(x),
        _ => Err(Error::NonConvergence {
            map: map.name().to_string(),
            starts: n_starts,
            residual: best_residual,
        }),
    }
}

fn run_from(map: &SmoothMap, y: &Point, mut x: Point, opts: &NewtonOptions) -> Option<(Point, f64)> {
    let mut fx = map.eval(&x) - y;
    let mut res = fx.norm();
    for _ in 0..opts.max_iter {
        if res <= opts.target {
            break;
        }
        let jac = map.jacobian_at(&x);
        let lu = jac.lu();
        let delta = lu.solve(&fx)?;
        // Step halving until the residual improves.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..32 {
            let cand = &x - lambda * &delta;
            if !map.is_singular_at(&cand) {
                let fc = map.eval(&cand) - y;
                let rc = fc.norm();
                if rc < res {
                    x = cand;
                    fx = fc;
                    res = rc;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Some((x, res))
}

fn grid_points(lo: &Point, hi: &Point, per_axis: usize) -> Vec<Point> {
    let n = lo.len();
    if per_axis == 0 || per_axis.pow(n as u32) > 20_000 {
        return Vec::new();
    }
    let total = per_axis.pow(n as u32);
    let mut pts = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rem = idx;
        let mut p = DVector::zeros(n);
        for i in 0..n {
            let k = rem % per_axis;
            rem /= per_axis;
            let t = if per_axis == 1 {
                0.5
            } else {
                (k as f64 + 0.5) / per_axis as f64
            };
            p[i] = lo[i] + t * (hi[i] - lo[i]);
        }
        pts.push(p);
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::SmoothMap;
    use nalgebra::dvector;

    #[test]
    fn inverts_a_shifted_cubic() {
        let f = SmoothMap::builder("cubic", 1, 1)
            .eval(|x| dvector![x[0] * x[0] * x[0] + 3.0 * x[0] - 7.0])
            .build();
        let opts = NewtonOptions::default();
        let x = invert(&f, &dvector![0.0], &opts).unwrap();
        assert!((x[0] - 1.406287579960535).abs() < 1e-10);
    }

    #[test]
    fn multi_start_recovers_from_bad_region() {
        // eval has a flat spot near the starting point y; grid starts rescue it.
        let f = SmoothMap::builder("atan", 1, 1)
            .eval(|x| dvector![x[0].atan()])
            .build();
        let opts = NewtonOptions {
            bbox: Some((dvector![-2.0], dvector![2.0])),
            grid_per_axis: 5,
            ..Default::default()
        };
        let x = invert(&f, &dvector![1.0], &opts).unwrap();
        assert!((x[0] - 1.0_f64.tan()).abs() < 1e-9);
    }

    #[test]
    fn reports_non_convergence() {
        // No solution: |x| has no preimage of -1.
        let f = SmoothMap::builder("abs", 1, 1)
            .eval(|x| dvector![x[0].abs()])
            .build();
        let r = invert(&f, &dvector![-1.0], &NewtonOptions::default());
        assert!(r.is_err());
    }
}
