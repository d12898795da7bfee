//! Central finite differences for first and second derivatives.
//!
//! Step sizes balance truncation against cancellation for f64: first
//! derivatives use `1e-6·scale`, second derivatives `1e-4·scale`, where
//! `scale = max(1, |x|)`.

use nalgebra::DMatrix;

use super::Hessian;
use crate::geometry::Point;

pub fn step_first(x: &Point) -> f64 {
    1e-6 * x.norm().max(1.0)
}

pub fn step_second(x: &Point) -> f64 {
    1e-4 * x.norm().max(1.0)
}

/// Central-difference Jacobian, column j = (f(x+h eⱼ) − f(x−h eⱼ)) / 2h.
pub fn fd_jacobian(f: &dyn Fn(&Point) -> Point, x: &Point, dim_out: usize) -> DMatrix<f64> {
    let n = x.len();
    let h = step_first(x);
    let mut jac = DMatrix::zeros(dim_out, n);
    for j in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let col = (f(&xp) - f(&xm)) / (2.0 * h);
        jac.set_column(j, &col);
    }
    jac
}

/// Central-difference Hessian: diagonal via the three-point stencil, mixed
/// entries via the four-point stencil.
pub fn fd_hessian(f: &dyn Fn(&Point) -> Point, x: &Point, dim_out: usize) -> Hessian {
    let n = x.len();
    let h = step_second(x);
    let f0 = f(x);
    let mut comps = vec![DMatrix::zeros(n, n); dim_out];

    for j in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let second = (f(&xp) + f(&xm) - 2.0 * &f0) / (h * h);
        for (i, comp) in comps.iter_mut().enumerate() {
            comp[(j, j)] = second[i];
        }
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let mut xpp = x.clone();
            let mut xpm = x.clone();
            let mut xmp = x.clone();
            let mut xmm = x.clone();
            xpp[j] += h;
            xpp[k] += h;
            xpm[j] += h;
            xpm[k] -= h;
            xmp[j] -= h;
            xmp[k] += h;
            xmm[j] -= h;
            xmm[k] -= h;
            let mixed = (f(&xpp) - f(&xpm) - f(&xmp) + f(&xmm)) / (4.0 * h * h);
            for (i, comp) in comps.iter_mut().enumerate() {
                comp[(j, k)] = mixed[i];
                comp[(k, j)] = mixed[i];
            }
        }
    }
    Hessian::new(comps)
}
