//! Sphere twists: `φ*(x) = φ(x/|x|)/|x|` and the radial extension
//! `φ̄(x) = |x|·φ(x/|x|)`, plus sphere-preserving test inputs.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{sphere_dir, Point};
use crate::map::SmoothMap;

pub struct TwistPair {
    /// The gluing map `φ*`; for φ = id this is the inversion `x/|x|²`.
    pub star: SmoothMap,
    /// The radial extension `φ̄`.
    pub bar: SmoothMap,
}

/// Build the twist pair of a sphere-preserving map. Rejects inputs that move
/// the unit sphere off itself (checked on seeded samples to 1e−12).
pub fn twist_maps(phi: &SmoothMap) -> Result<TwistPair> {
    use rand::SeedableRng;
    let dim = phi.dim_in();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x7157);
    for _ in 0..256 {
        let u = sphere_dir(&mut rng, dim);
        let v = phi.eval(&u);
        if (v.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Hypothesis(format!(
                "map `{}` does not preserve the unit sphere (|phi(u)| = {})",
                phi.name(),
                v.norm()
            )));
        }
    }
    Ok(TwistPair {
        star: twist_star(phi),
        bar: twist_bar(phi),
    })
}

fn twist_star(phi: &SmoothMap) -> SmoothMap {
    let dim = phi.dim_in();
    let p = phi.clone();
    let p_inv = phi.clone();
    let mut b = SmoothMap::builder(format!("star({})", phi.name()), dim, dim)
        .eval(move |x: &Point| {
            let t = x.norm();
            p.eval(&(x / t)) / t
        })
        .singular_distance(|x: &Point| x.norm());
    if phi.has_inverse() {
        b = b.inverse_lazy(move || twist_star(&p_inv.inverse().expect("phi inverse")));
    }
    b.build()
}

fn twist_bar(phi: &SmoothMap) -> SmoothMap {
    let dim = phi.dim_in();
    let p = phi.clone();
    let p_inv = phi.clone();
    let mut b = SmoothMap::builder(format!("bar({})", phi.name()), dim, dim)
        .eval(move |x: &Point| {
            let t = x.norm();
            if t == 0.0 {
                return x.clone();
            }
            p.eval(&(x / t)) * t
        });
    if phi.has_inverse() {
        b = b.inverse_lazy(move || twist_bar(&p_inv.inverse().expect("phi inverse")));
    }
    b.build()
}

/// Fixed rotation by `angle` in the coordinate plane `(p, q)`.
pub fn sphere_rotation(dim: usize, plane: (usize, usize), angle: f64) -> SmoothMap {
    let (p, q) = plane;
    assert!(p != q && p < dim && q < dim);
    let mut m = DMatrix::identity(dim, dim);
    m[(p, p)] = angle.cos();
    m[(q, q)] = angle.cos();
    m[(p, q)] = -angle.sin();
    m[(q, p)] = angle.sin();
    crate::map::linear(m)
}

/// Position-dependent rotation `x ↦ Rot_{p,q}(ψ(xₙ))·x` with a C¹ ramp ψ
/// supported near the north pole. The angle depends only on the last
/// coordinate, which the rotation plane leaves fixed, so the map preserves
/// every sphere about the origin and inverts by negating the amplitude.
/// Requires the plane to avoid the last axis (ambient dimension ≥ 3).
pub fn sphere_bump_rotation(dim: usize, plane: (usize, usize), amplitude: f64, width: f64) -> SmoothMap {
    let (p, q) = plane;
    assert!(dim >= 3 && p != q && p < dim - 1 && q < dim - 1);
    assert!(width > 0.0 && width < 2.0);
    let name = format!("sphere-bump[{amplitude}]");
    let angle_at = move |t: f64| {
        let s = (t - (1.0 - width)) / width;
        if s <= 0.0 {
            0.0
        } else if s >= 1.0 {
            amplitude
        } else {
            amplitude * s * s * (3.0 - 2.0 * s)
        }
    };
    SmoothMap::builder(name, dim, dim)
        .eval(move |x: &Point| {
            let theta = angle_at(x[dim - 1]);
            if theta == 0.0 {
                return x.clone();
            }
            let (c, s) = (theta.cos(), theta.sin());
            let mut y = x.clone();
            y[p] = c * x[p] - s * x[q];
            y[q] = s * x[p] + c * x[q];
            y
        })
        .inverse_lazy(move || sphere_bump_rotation(dim, plane, -amplitude, width))
        .build()
}

// Twist evaluators call phi only on unit vectors, so angle ramps keyed to the
// last coordinate see values in [-1, 1].

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{compose, identity};
    use crate::primitives::generalized_inversion;
    use nalgebra::dvector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_twist_is_plain_inversion() {
        let pair = twist_maps(&identity(3)).unwrap();
        let x = dvector![0.5, -1.0, 2.0];
        let expect = &x / x.norm_squared();
        assert!((pair.star.eval(&x) - expect).norm() < 1e-15);
        assert!((pair.bar.eval(&x) - &x).norm() < 1e-15);
    }

    #[test]
    fn untwist_identity_recovers_radial_extension() {
        // (id*)^{-1} ∘ φ* = φ̄ pointwise; id* is the self-inverse classical
        // inversion.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let id_star = generalized_inversion(3, 1.0, 1.0);
        for phi in [
            sphere_rotation(3, (0, 1), 0.8),
            // fixed rotation touching the last axis is fine here
            sphere_rotation(3, (1, 2), -0.3),
        ] {
            let pair = twist_maps(&phi).unwrap();
            let lhs = compose(&id_star, &pair.star);
            for _ in 0..100 {
                let x = sphere_dir(&mut rng, 3) * (0.2 + 2.0 * rand::Rng::gen::<f64>(&mut rng));
                assert!((lhs.eval(&x) - pair.bar.eval(&x)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn bump_rotation_preserves_spheres_and_inverts() {
        let phi = sphere_bump_rotation(4, (0, 1), 0.7, 0.8);
        let inv = phi.inverse().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let u = sphere_dir(&mut rng, 4);
            let v = phi.eval(&u);
            assert!((v.norm() - 1.0).abs() < 1e-14);
            assert!((inv.eval(&v) - &u).norm() < 1e-13);
        }
    }

    #[test]
    fn non_sphere_preserving_input_is_rejected() {
        let stretch = crate::map::dilation(3, 1.5);
        assert!(twist_maps(&stretch).is_err());
    }
}
