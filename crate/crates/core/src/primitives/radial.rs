//! Radial stretch `R(x) = ρ(|x|)·x/|x|` with a monotone C¹ profile.
//!
//! The profile is a piecewise-cubic Hermite spline on the knots {0, r₁, 1}
//! with ρ(0)=0, ρ(r₁)=r₂, ρ(1)=1 and unit slope at 1, clamped to the exact
//! identity on [1,∞). Tangents follow the Fritsch–Butland harmonic-mean rule,
//! and the construction rejects data for which the sufficient monotonicity
//! condition fails.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::map::{Hessian, SmoothMap};

#[derive(Clone, Copy, Debug)]
pub struct RadialProfile {
    pub r1: f64,
    pub r2: f64,
    m0: f64,
    m1: f64,
    m2: f64,
}

impl RadialProfile {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !(0.0 < r1 && r1 < r2 && r2 < 1.0) {
            return Err(Error::InvalidGeometry(format!(
                "radial profile needs 0 < r1 < r2 < 1, got r1={r1}, r2={r2}"
            )));
        }
        let d0 = r2 / r1;
        let d1 = (1.0 - r2) / (1.0 - r1);
        let m0 = d0;
        let m1 = 2.0 * d0 * d1 / (d0 + d1);
        let m2 = 1.0;
        // Fritsch–Carlson sufficient condition: tangents at most 3x the
        // adjacent secant slopes.
        if m0 > 3.0 * d0 + 1e-12 || m1 > 3.0 * d0.min(d1) + 1e-12 || m2 > 3.0 * d1 + 1e-12 {
            return Err(Error::InvalidGeometry(format!(
                "radial profile is not monotone for r1={r1}, r2={r2} (secants {d0:.4}, {d1:.4})"
            )));
        }
        let p = RadialProfile { r1, r2, m0, m1, m2 };
        // Defensive dense check of ρ' > 0 on [0,1].
        for i in 0..=400 {
            let t = i as f64 / 400.0;
            if p.derivative(t) <= 0.0 {
                return Err(Error::InvalidGeometry(format!(
                    "radial profile derivative vanishes at t={t}"
                )));
            }
        }
        Ok(p)
    }

    fn piece(&self, t: f64) -> (f64, f64, f64, f64, f64, f64) {
        // (t0, t1, y0, y1, m_left, m_right)
        if t < self.r1 {
            (0.0, self.r1, 0.0, self.r2, self.m0, self.m1)
        } else {
            (self.r1, 1.0, self.r2, 1.0, self.m1, self.m2)
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return t;
        }
        if t <= 0.0 {
            return 0.0;
        }
        let (t0, t1, y0, y1, ml, mr) = self.piece(t);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * y0 + h10 * h * ml + h01 * y1 + h11 * h * mr
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return 1.0;
        }
        if t <= 0.0 {
            return self.m0;
        }
        let (t0, t1, y0, y1, ml, mr) = self.piece(t);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let dh00 = 6.0 * s * s - 6.0 * s;
        let dh10 = 3.0 * s * s - 4.0 * s + 1.0;
        let dh01 = -6.0 * s * s + 6.0 * s;
        let dh11 = 3.0 * s * s - 2.0 * s;
        (dh00 * y0 + dh01 * y1) / h + dh10 * ml + dh11 * mr
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        if t >= 1.0 || t <= 0.0 {
            return 0.0;
        }
        let (t0, t1, y0, y1, ml, mr) = self.piece(t);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let d2h00 = 12.0 * s - 6.0;
        let d2h10 = 6.0 * s - 4.0;
        let d2h01 = -12.0 * s + 6.0;
        let d2h11 = 6.0 * s - 2.0;
        (d2h00 * y0 + d2h01 * y1) / (h * h) + (d2h10 * ml + d2h11 * mr) / h
    }

    /// Monotone inverse: bisection refined by Newton, exact above 1.
    pub fn invert(&self, s: f64) -> f64 {
        if s >= 1.0 {
            return s;
        }
        if s <= 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut t = if s < self.r2 {
            self.r1 * s / self.r2
        } else {
            self.r1 + (1.0 - self.r1) * (s - self.r2) / (1.0 - self.r2)
        };
        for _ in 0..200 {
            let v = self.value(t) - s;
            if v.abs() < 1e-15 {
                break;
            }
            if v > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let d = self.derivative(t);
            let mut next = t - v / d;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            t = next;
        }
        t
    }
}

/// Unit-ball radial stretch: maps `B(0,r₁)` onto `B(0,r₂)`, identity outside
/// the unit ball (bitwise: points with `|x| ≥ 1` are returned untouched).
pub fn radial_stretch(dim: usize, profile: RadialProfile) -> SmoothMap {
    build(dim, profile, false)
}

/// Radial stretch scaled to the ball `B(0, ball_radius)`; the profile knots
/// live in unit coordinates.
pub fn radial_stretch_in_ball(dim: usize, profile: RadialProfile, ball_radius: f64) -> SmoothMap {
    use crate::map::{compose, dilation};
    if (ball_radius - 1.0).abs() < 1e-15 {
        return radial_stretch(dim, profile);
    }
    let inner = compose(&radial_stretch(dim, profile), &dilation(dim, 1.0 / ball_radius));
    compose(&dilation(dim, ball_radius), &inner)
}

fn build(dim: usize, profile: RadialProfile, inverted: bool) -> SmoothMap {
    let name = if inverted {
        "radial-stretch-inv"
    } else {
        "radial-stretch"
    };
    let p_eval = profile;
    let p_jac = profile;
    let p_hess = profile;

    let rho_val = move |t: f64| {
        if inverted {
            p_eval.invert(t)
        } else {
            p_eval.value(t)
        }
    };
    let rho_d = move |t: f64| {
        if inverted {
            1.0 / p_jac.derivative(p_jac.invert(t))
        } else {
            p_jac.derivative(t)
        }
    };
    let rho_dd = move |t: f64| {
        if inverted {
            let u = p_hess.invert(t);
            let d = p_hess.derivative(u);
            -p_hess.second_derivative(u) / (d * d * d)
        } else {
            p_hess.second_derivative(t)
        }
    };

    SmoothMap::builder(name, dim, dim)
        .eval(move |x: &Point| {
            let t = x.norm();
            if t >= 1.0 {
                return x.clone();
            }
            if t == 0.0 {
                return x.clone();
            }
            (rho_val(t) / t) * x
        })
        .jacobian(move |x: &Point| {
            let t = x.norm();
            if t >= 1.0 {
                return DMatrix::identity(dim, dim);
            }
            if t < 1e-300 {
                return DMatrix::identity(dim, dim) * rho_d(0.0);
            }
            let u = x / t;
            let g = rho_val(t) / t;
            let uut = &u * u.transpose();
            DMatrix::identity(dim, dim) * g + (rho_d(t) - g) * uut
        })
        .hessian(move |x: &Point| {
            let t = x.norm();
            if t >= 1.0 || t < 1e-300 {
                return Hessian::zeros(dim, dim);
            }
            let u = x / t;
            let rv = rho_val(t);
            let rd = rho_d(t);
            let rdd = rho_dd(t);
            // g = rho/t, with g' and g'' in terms of rho.
            let gp = rd / t - rv / (t * t);
            let gpp = rdd / t - 2.0 * rd / (t * t) + 2.0 * rv / (t * t * t);
            let mut comps = Vec::with_capacity(dim);
            for i in 0..dim {
                let mut m = DMatrix::zeros(dim, dim);
                for j in 0..dim {
                    for k in 0..dim {
                        let mut v = gpp * t * u[i] * u[j] * u[k] - gp * u[i] * u[j] * u[k];
                        if i == k {
                            v += gp * u[j];
                        }
                        if j == k {
                            v += gp * u[i];
                        }
                        if i == j {
                            v += gp * u[k];
                        }
                        m[(j, k)] = v;
                    }
                }
                comps.push(m);
            }
            Hessian::new(comps)
        })
        .inverse_lazy(move || build(dim, profile, !inverted))
        .build()
}
