//! Stereographic charts ℝⁿ → 𝕊ⁿ ⊂ ℝⁿ⁺¹, normalized so that the transition
//! between the two charts is exactly the classical inversion `x/|x|²`.

use nalgebra::{DMatrix, DVector};

use crate::geometry::{Point, Region};
use crate::map::SmoothMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pole {
    North,
    South,
}

/// Inverse stereographic projection onto the unit sphere in ℝⁿ⁺¹ relative to
/// the chosen pole. The north chart sends 0 to the south pole and vice versa;
/// the inverse handle is the corresponding planar projection.
pub fn stereographic(dim: usize, pole: Pole) -> SmoothMap {
    // sign = +1: last sphere coordinate is (|x|²−1)/(|x|²+1)  (north chart)
    // sign = -1: last sphere coordinate is (1−|x|²)/(|x|²+1)  (south chart)
    let sign = match pole {
        Pole::North => 1.0,
        Pole::South => -1.0,
    };
    let name = match pole {
        Pole::North => "stereo-north",
        Pole::South => "stereo-south",
    };
    SmoothMap::builder(name, dim, dim + 1)
        .eval(move |x: &Point| {
            let q = x.norm_squared() + 1.0;
            let mut y = DVector::zeros(dim + 1);
            for i in 0..dim {
                y[i] = 2.0 * x[i] / q;
            }
            y[dim] = sign * (x.norm_squared() - 1.0) / q;
            y
        })
        .jacobian(move |x: &Point| {
            let q = x.norm_squared() + 1.0;
            let mut j = DMatrix::zeros(dim + 1, dim);
            for i in 0..dim {
                for k in 0..dim {
                    let mut v = -4.0 * x[i] * x[k] / (q * q);
                    if i == k {
                        v += 2.0 / q;
                    }
                    j[(i, k)] = v;
                }
            }
            for k in 0..dim {
                j[(dim, k)] = sign * 4.0 * x[k] / (q * q);
            }
            j
        })
        .inverse_lazy(move || planar_projection(dim, pole))
        .build()
}

/// Projection 𝕊ⁿ∖{pole} → ℝⁿ, the inverse chart of [`stereographic`].
fn planar_projection(dim: usize, pole: Pole) -> SmoothMap {
    let sign = match pole {
        Pole::North => 1.0,
        Pole::South => -1.0,
    };
    let name = match pole {
        Pole::North => "stereo-north-proj",
        Pole::South => "stereo-south-proj",
    };
    // The formula is defined off the hyperplane through the pole.
    let domain = match pole {
        Pole::North => Region::half_space_below(dim + 1, dim, 1.0),
        Pole::South => Region::half_space_above(dim + 1, dim, -1.0),
    };
    SmoothMap::builder(name, dim + 1, dim)
        .domain(domain)
        .eval(move |xi: &Point| {
            let w = 1.0 - sign * xi[dim];
            DVector::from_fn(dim, |i, _| xi[i] / w)
        })
        .jacobian(move |xi: &Point| {
            let w = 1.0 - sign * xi[dim];
            let mut j = DMatrix::zeros(dim, dim + 1);
            for i in 0..dim {
                j[(i, i)] = 1.0 / w;
                j[(i, dim)] = sign * xi[i] / (w * w);
            }
            j
        })
        .singular_distance(move |xi: &Point| (1.0 - sign * xi[dim]).abs())
        .inverse_lazy(move || stereographic(dim, pole))
        .build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{compose, fd_jacobian};
    use crate::geometry::sphere_dir;
    use nalgebra::dvector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn image_is_on_the_unit_sphere() {
        let pi1 = stereographic(3, Pole::North);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let x = sphere_dir(&mut rng, 3) * (0.1 + 3.0 * rng.gen::<f64>());
            assert!((pi1.eval(&x).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn origin_goes_to_south_pole() {
        let pi1 = stereographic(2, Pole::North);
        let y = pi1.eval(&dvector![0.0, 0.0]);
        assert!((y - dvector![0.0, 0.0, -1.0]).norm() < 1e-15);
    }

    #[test]
    fn chart_transition_is_classical_inversion() {
        // π₂⁻¹ ∘ π₁ = id* on ℝⁿ∖{0}.
        for dim in [2usize, 3, 7] {
            let pi1 = stereographic(dim, Pole::North);
            let pi2_inv = stereographic(dim, Pole::South).inverse().unwrap();
            let transition = compose(&pi2_inv, &pi1);
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            for _ in 0..100 {
                let x = sphere_dir(&mut rng, dim) * (0.05 + 4.0 * rng.gen::<f64>());
                let expect = &x / x.norm_squared();
                assert!((transition.eval(&x) - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_through_the_chart() {
        let pi1 = stereographic(3, Pole::North);
        let proj = pi1.inverse().unwrap();
        let x = dvector![0.3, -1.2, 0.8];
        assert!((proj.eval(&pi1.eval(&x)) - &x).norm() < 1e-13);
    }

    #[test]
    fn analytic_jacobian_matches_fd() {
        let pi1 = stereographic(2, Pole::North);
        let x = dvector![0.7, -0.4];
        let j = pi1.jacobian_at(&x);
        let pc = pi1.clone();
        let j_fd = fd_jacobian(&move |p: &Point| pc.eval(p), &x, 3);
        assert!((j - j_fd).amax() < 1e-7);
    }
}
