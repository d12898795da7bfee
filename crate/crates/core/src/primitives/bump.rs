//! Bump-built test diffeomorphisms: compactly supported rotations and
//! translations, plus global similarities, composed from a recipe.
//!
//! Every compactly supported piece returns its input bitwise outside the
//! support ball, so recipes are exactly the identity far away.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Ball, Point};
use crate::map::{compose, dilation, identity, translation, NewtonOptions, SmoothMap};

/// C¹ bump profile η(s) = (1−s²)² on [0,1), zero beyond.
fn eta(s: f64) -> f64 {
    if s >= 1.0 {
        0.0
    } else {
        let w = 1.0 - s * s;
        w * w
    }
}

fn eta_prime(s: f64) -> f64 {
    if s >= 1.0 {
        0.0
    } else {
        -4.0 * s * (1.0 - s * s)
    }
}

/// sup |η'| over [0,1], attained at s = 1/√3.
pub const ETA_PRIME_MAX: f64 = 1.5396007178390022;

/// Rotation by `angle·η(|x−center|/radius)` in the coordinate plane `(p,q)`
/// about `center`; identity outside `B(center, radius)`.
pub fn bump_rotation(
    dim: usize,
    center: Point,
    radius: f64,
    angle: f64,
    plane: (usize, usize),
) -> SmoothMap {
    let (p, q) = plane;
    assert!(p != q && p < dim && q < dim, "invalid rotation plane");
    assert!(radius > 0.0);
    let c_eval = center.clone();
    let c_jac = center.clone();
    let c_inv = center.clone();

    SmoothMap::builder("bump-rotation", dim, dim)
        .eval(move |x: &Point| {
            let v = x - &c_eval;
            let s = v.norm() / radius;
            if s >= 1.0 {
                return x.clone();
            }
            let theta = angle * eta(s);
            let (co, si) = (theta.cos(), theta.sin());
            let mut w = v;
            let (vp, vq) = (w[p], w[q]);
            w[p] = co * vp - si * vq;
            w[q] = si * vp + co * vq;
            w + &c_eval
        })
        .jacobian(move |x: &Point| {
            let v = x - &c_jac;
            let t = v.norm();
            let s = t / radius;
            if s >= 1.0 {
                return DMatrix::identity(dim, dim);
            }
            let theta = angle * eta(s);
            let (co, si) = (theta.cos(), theta.sin());
            let mut rot = DMatrix::identity(dim, dim);
            rot[(p, p)] = co;
            rot[(q, q)] = co;
            rot[(p, q)] = -si;
            rot[(q, p)] = si;
            if t < 1e-300 {
                return rot;
            }
            // d/dθ of the rotation applied to v, times ∇θ.
            let mut dr_v = DVector::zeros(dim);
            dr_v[p] = -si * v[p] - co * v[q];
            dr_v[q] = co * v[p] - si * v[q];
            let grad_theta = (angle * eta_prime(s) / (t * radius)) * &v;
            rot + dr_v * grad_theta.transpose()
        })
        .inverse_lazy(move || bump_rotation(dim, c_inv.clone(), radius, -angle, plane))
        .build()
}

/// Displacement `x + η(|x−center|/radius)·shift`; identity outside the
/// support ball. Requires the contraction bound
/// `sup|η'|·|shift|/radius < 1`, which makes the map bi-Lipschitz; the
/// inverse is numeric.
pub fn bump_translation(dim: usize, center: Point, radius: f64, shift: Point) -> Result<SmoothMap> {
    assert!(radius > 0.0);
    let kappa = ETA_PRIME_MAX * shift.norm() / radius;
    if kappa >= 1.0 {
        return Err(Error::InvalidGeometry(format!(
            "bump translation is not invertible: contraction factor {kappa:.3} >= 1"
        )));
    }
    let c_eval = center.clone();
    let c_jac = center.clone();
    let s_eval = shift.clone();
    let s_jac = shift.clone();
    let lo = center.map(|c| c - radius - shift.norm());
    let hi = center.map(|c| c + radius + shift.norm());
    Ok(SmoothMap::builder("bump-translation", dim, dim)
        .eval(move |x: &Point| {
            let s = (x - &c_eval).norm() / radius;
            if s >= 1.0 {
                return x.clone();
            }
            x + eta(s) * &s_eval
        })
        .jacobian(move |x: &Point| {
            let v = x - &c_jac;
            let t = v.norm();
            let s = t / radius;
            if s >= 1.0 || t < 1e-300 {
                return DMatrix::identity(dim, dim);
            }
            let grad = (eta_prime(s) / (t * radius)) * v;
            DMatrix::identity(dim, dim) + &s_jac * grad.transpose()
        })
        .inverse_newton(NewtonOptions {
            bbox: Some((lo, hi)),
            ..Default::default()
        })
        .build())
}

/// Recipe pieces. Bump pieces are compactly supported; translations and
/// dilations are global.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapRecipePiece {
    BumpRotation {
        center: Vec<f64>,
        radius: f64,
        angle: f64,
        plane: (usize, usize),
    },
    BumpTranslation {
        center: Vec<f64>,
        radius: f64,
        shift: Vec<f64>,
    },
    Translation {
        shift: Vec<f64>,
    },
    Dilation {
        scale: f64,
    },
}

fn to_point(dim: usize, v: &[f64], what: &str) -> Result<Point> {
    if v.len() != dim {
        return Err(Error::InvalidGeometry(format!(
            "{what} has {} coordinates, ambient dimension is {dim}",
            v.len()
        )));
    }
    Ok(DVector::from_column_slice(v))
}

/// Compose recipe pieces (applied left to right) into one locally
/// bi-Lipschitz, piecewise-C² homeomorphism. The empty recipe is the
/// identity.
pub fn make_test_diffeo(dim: usize, recipe: &[MapRecipePiece]) -> Result<SmoothMap> {
    let mut map: Option<SmoothMap> = None;
    for piece in recipe {
        let m = match piece {
            MapRecipePiece::BumpRotation {
                center,
                radius,
                angle,
                plane,
            } => bump_rotation(dim, to_point(dim, center, "bump center")?, *radius, *angle, *plane),
            MapRecipePiece::BumpTranslation {
                center,
                radius,
                shift,
            } => bump_translation(
                dim,
                to_point(dim, center, "bump center")?,
                *radius,
                to_point(dim, shift, "bump shift")?,
            )?,
            MapRecipePiece::Translation { shift } => {
                translation(&to_point(dim, shift, "translation shift")?)
            }
            MapRecipePiece::Dilation { scale } => {
                if *scale == 0.0 {
                    return Err(Error::InvalidGeometry("dilation scale must be nonzero".into()));
                }
                dilation(dim, *scale)
            }
        };
        map = Some(match map {
            None => m,
            Some(prev) => compose(&m, &prev),
        });
    }
    Ok(map.unwrap_or_else(|| identity(dim)))
}

/// Enclosing ball of the compactly supported pieces; `None` when the recipe
/// contains a global piece (translation or dilation) or is empty.
pub fn recipe_support(dim: usize, recipe: &[MapRecipePiece]) -> Option<Ball> {
    let mut balls: Vec<(Point, f64)> = Vec::new();
    for piece in recipe {
        match piece {
            MapRecipePiece::BumpRotation { center, radius, .. } => {
                balls.push((DVector::from_column_slice(center), *radius));
            }
            MapRecipePiece::BumpTranslation { center, radius, .. } => {
                balls.push((DVector::from_column_slice(center), *radius));
            }
            _ => return None,
        }
    }
    let first = balls.first()?;
    let mut center = first.0.clone();
    let mut radius = first.1;
    // Greedy enclosing ball: grow toward each additional support ball.
    for (c, r) in balls.iter().skip(1) {
        let d = (c - &center).norm();
        if d + r <= radius {
            continue;
        }
        let new_radius = (radius + d + r) / 2.0;
        let shift_len = new_radius - radius;
        if d > 1e-300 {
            center += (shift_len / d) * (c - &center);
        }
        radius = new_radius;
    }
    let _ = dim;
    Some(Ball { center, radius })
}
