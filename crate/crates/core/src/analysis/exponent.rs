//! Exact integrability-exponent test.
//!
//! Decides `(n−1) − (n−p)(1/a + 1) < −1` in exact rational arithmetic (f64
//! inputs are dyadic rationals), so the decision agrees with the algebraic
//! equivalent `a < n/p − 1` without floating-point boundary artifacts.

use num::BigRational;
use num::FromPrimitive;

/// Whether the radial tail exponent is integrable: true iff
/// `(n−1) − (n−p)(1/a+1) < −1`, equivalently `a < n/p − 1`.
pub fn exponent_check(n: u32, p: f64, a: f64) -> bool {
    let n = BigRational::from_u32(n).expect("dimension");
    let p = BigRational::from_f64(p).expect("finite p");
    let a = BigRational::from_f64(a).expect("finite a");
    let one = BigRational::from_u32(1).unwrap();
    assert!(a > BigRational::from_u32(0).unwrap(), "a must be positive");
    assert!(p >= one && p < n, "p must satisfy 1 <= p < n");
    let lhs = (&n - &one) - (&n - &p) * (a.recip() + &one);
    lhs < -one
}

/// The algebraic route `a < n/p − 1`, also in exact rationals.
pub fn exponent_check_algebraic(n: u32, p: f64, a: f64) -> bool {
    let n = BigRational::from_u32(n).expect("dimension");
    let p = BigRational::from_f64(p).expect("finite p");
    let a = BigRational::from_f64(a).expect("finite a");
    a < n / p - BigRational::from_u32(1).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        // n=3, p=1, a=1: exponent 2 − 2·2 = −2 < −1.
        assert!(exponent_check(3, 1.0, 1.0));
        // n=3, p=1, a=2: exponent 2 − 2·1.5 = −1, not < −1 (boundary).
        assert!(!exponent_check(3, 1.0, 2.0));
    }

    #[test]
    fn boundary_in_dimension_seven() {
        // n=7, p=6: threshold a = 1/6. Exactly at the threshold: false.
        let third = 7.0 / 6.0 - 1.0;
        assert!(!exponent_check(7, 6.0, third));
        assert!(exponent_check(7, 6.0, third * (1.0 - 1e-9)));
    }

    #[test]
    fn equivalence_over_a_grid() {
        for n in 2..=8u32 {
            let mut p = 1.0;
            while p < n as f64 {
                let mut k = 1;
                while k <= 60 {
                    let a = k as f64 * 0.05;
                    assert_eq!(
                        exponent_check(n, p, a),
                        exponent_check_algebraic(n, p, a),
                        "mismatch at n={n}, p={p}, a={a}"
                    );
                    k += 1;
                }
                p += 0.25;
            }
        }
    }
}
