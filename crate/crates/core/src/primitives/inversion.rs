//! Generalized inversions `I_{a,r}(x) = r^{a+1}|x|^{−(a+1)}x`.
//!
//! `I_{a,r}` fixes the sphere `|x| = r` pointwise, preserves radial rays, and
//! satisfies `(I_{a,r})⁻¹ = I_{1/a,r}`. The classical conformal inversion is
//! the case a = 1.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::map::{Hessian, SmoothMap};

#[derive(Clone, Copy, Debug)]
pub struct InversionParams {
    pub exponent: f64,
    pub radius: f64,
}

impl InversionParams {
    pub fn new(exponent: f64, radius: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "inversion exponent must be positive, got {exponent}"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "inversion radius must be positive, got {radius}"
            )));
        }
        Ok(InversionParams { exponent, radius })
    }

    /// |I(x)| as a function of |x|.
    pub fn image_norm(&self, t: f64) -> f64 {
        self.radius.powf(self.exponent + 1.0) * t.powf(-self.exponent)
    }
}

/// Build `I_{a,r}` on ℝⁿ∖{0} with analytic derivatives and the analytic
/// inverse `I_{1/a,r}`.
pub fn generalized_inversion(dim: usize, a: f64, r: f64) -> SmoothMap {
    let params = InversionParams::new(a, r).expect("valid inversion parameters");
    let (a1, r1) = (params.exponent, params.radius);
    let scale_pow = r.powf(a + 1.0);

    SmoothMap::builder(format!("inversion[a={a},r={r}]"), dim, dim)
        .eval(move |x: &Point| {
            let t = x.norm();
            scale_pow * t.powf(-(a1 + 1.0)) * x
        })
        .jacobian(move |x: &Point| {
            let t = x.norm();
            let k = scale_pow * t.powf(-(a1 + 1.0));
            let u = x / t;
            let mut j = DMatrix::identity(dim, dim) * k;
            j -= (k * (a1 + 1.0)) * (&u * u.transpose());
            j
        })
        .hessian(move |x: &Point| {
            let t = x.norm();
            let k = scale_pow * t.powf(-(a1 + 3.0));
            let b = a1 + 1.0;
            let g = (a1 + 1.0) * (a1 + 3.0) / (t * t);
            let mut comps = Vec::with_capacity(dim);
            for i in 0..dim {
                let mut m = DMatrix::zeros(dim, dim);
                for j in 0..dim {
                    for l in 0..dim {
                        let mut v = g * x[i] * x[j] * x[l];
                        if i == j {
                            v -= b * x[l];
                        }
                        if i == l {
                            v -= b * x[j];
                        }
                        if j == l {
                            v -= b * x[i];
                        }
                        m[(j, l)] = k * v;
                    }
                }
                comps.push(m);
            }
            Hessian::new(comps)
        })
        .singular_distance(|x: &Point| x.norm())
        .inverse_lazy(move || generalized_inversion(dim, 1.0 / a1, r1))
        .build()
}

/// Sharp envelopes for the derivative norms and the Jacobian determinant of
/// `I_{a,r}` at `x`:
///
/// * `|D I| = √(n−1+a²) · r^{a+1}|x|^{−(a+1)}`
/// * `|D²I| = (a+1)√(a²+3(n−1)) · r^{a+1}|x|^{−(a+2)}`
/// * `J I ≤ n · r^{n(a+1)}|x|^{−n(a+1)}` (the exact value is `a·(r^{a+1}|x|^{−(a+1)})ⁿ`)
#[derive(Clone, Copy, Debug)]
pub struct InversionEnvelopes {
    /// Envelope for |Dᵏ I| at the requested order.
    pub derivative: f64,
    /// The base factor r^{a+1}|x|^{−(a+k)} without the dimensional constant.
    pub base: f64,
    /// Envelope for the Jacobian determinant (order 1 only).
    pub jacobian: Option<f64>,
}

pub fn inversion_envelopes(
    params: &InversionParams,
    dim: usize,
    x: &Point,
    order: u8,
) -> Result<InversionEnvelopes> {
    let t = x.norm();
    if t < 1e-150 {
        return Err(Error::SingularPoint {
            map: "inversion".into(),
        });
    }
    let a = params.exponent;
    let r = params.radius;
    let n = dim as f64;
    match order {
        1 => {
            let base = r.powf(a + 1.0) * t.powf(-(a + 1.0));
            Ok(InversionEnvelopes {
                derivative: (n - 1.0 + a * a).sqrt() * base,
                base,
                jacobian: Some(n * r.powf(n * (a + 1.0)) * t.powf(-n * (a + 1.0))),
            })
        }
        2 => {
            let base = r.powf(a + 1.0) * t.powf(-(a + 2.0));
            Ok(InversionEnvelopes {
                derivative: (a + 1.0) * (a * a + 3.0 * (n - 1.0)).sqrt() * base,
                base,
                jacobian: None,
            })
        }
        _ => Err(Error::InvalidGeometry(format!(
            "derivative order must be 1 or 2, got {order}"
        ))),
    }
}
