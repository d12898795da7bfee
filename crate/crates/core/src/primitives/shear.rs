//! The slab shear: identity below the slab, the lattice step τ₋₁ above it.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::map::{Hessian, SmoothMap};

/// Slab levels `a < b` with half-width `c = (b − a)/2`.
#[derive(Clone, Copy, Debug)]
pub struct ShearParams {
    pub a: f64,
    pub b: f64,
}

impl ShearParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidGeometry(format!(
                "shear slab needs a < b, got a={a}, b={b}"
            )));
        }
        Ok(ShearParams { a, b })
    }

    pub fn half_width(&self) -> f64 {
        (self.b - self.a) / 2.0
    }

    pub fn midline(&self) -> f64 {
        (self.a + self.b) / 2.0
    }
}

/// The ramp profile s: 0 below the slab, 3 above it, built from the odd
/// C^{1,1} quadratic spline s₀ via `s(t) = (3/2)(s₀(t − (a+b)/2) + 1)`.
#[derive(Clone, Copy, Debug)]
pub struct ShearProfile {
    params: ShearParams,
}

pub fn shear_profile(a: f64, b: f64) -> Result<ShearProfile> {
    Ok(ShearProfile {
        params: ShearParams::new(a, b)?,
    })
}

impl ShearProfile {
    fn s0(&self, u: f64) -> f64 {
        let c = self.params.half_width();
        if u >= 0.0 {
            if u <= c {
                1.0 - (u - c) * (u - c) / (c * c)
            } else {
                1.0
            }
        } else {
            -self.s0(-u)
        }
    }

    fn s0_prime(&self, u: f64) -> f64 {
        let c = self.params.half_width();
        let t = u.abs();
        if t <= c {
            2.0 * (c - t) / (c * c)
        } else {
            0.0
        }
    }

    /// Second derivative; at the kink points the right-hand limit is used
    /// (the a.e. value has constant magnitude 2/c² inside the slab).
    fn s0_second(&self, u: f64) -> f64 {
        let c = self.params.half_width();
        if u >= 0.0 && u < c {
            -2.0 / (c * c)
        } else if u < 0.0 && u > -c {
            2.0 / (c * c)
        } else {
            0.0
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        1.5 * (self.s0(t - self.params.midline()) + 1.0)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        1.5 * self.s0_prime(t - self.params.midline())
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        1.5 * self.s0_second(t - self.params.midline())
    }
}

/// The shear `S(x) = x − s(xₙ)e₁`: identity on `{xₙ < a}`, the translation
/// `x ↦ x − 3e₁` on `{xₙ > b}`, with `|D²S| = 3/c²` a.e. inside the slab.
pub fn shear(dim: usize, a: f64, b: f64) -> SmoothMap {
    assert!(dim >= 2, "shear needs ambient dimension >= 2");
    let profile = shear_profile(a, b).expect("valid shear levels");
    build(dim, profile, -1.0, move || shear_inverse(dim, a, b))
}

fn shear_inverse(dim: usize, a: f64, b: f64) -> SmoothMap {
    let profile = shear_profile(a, b).expect("valid shear levels");
    build(dim, profile, 1.0, move || shear(dim, a, b))
}

fn build(
    dim: usize,
    profile: ShearProfile,
    sign: f64,
    inverse: impl Fn() -> SmoothMap + Send + Sync + 'static,
) -> SmoothMap {
    let n = dim - 1;
    let p_eval = profile;
    let p_jac = profile;
    let p_hess = profile;
    let name = if sign < 0.0 { "shear" } else { "shear-inv" };
    SmoothMap::builder(name, dim, dim)
        .eval(move |x: &Point| {
            let s = p_eval.value(x[n]);
            if s == 0.0 {
                return x.clone();
            }
            let mut y = x.clone();
            y[0] += sign * s;
            y
        })
        .jacobian(move |x: &Point| {
            let mut j = DMatrix::identity(dim, dim);
            j[(0, n)] = sign * p_jac.derivative(x[n]);
            j
        })
        .hessian(move |x: &Point| {
            let mut h = Hessian::zeros(dim, dim);
            let mut comps: Vec<DMatrix<f64>> = h.components().to_vec();
            comps[0][(n, n)] = sign * p_hess.second_derivative(x[n]);
            h = Hessian::new(comps);
            h
        })
        .inverse_lazy(inverse)
        .build()
}
