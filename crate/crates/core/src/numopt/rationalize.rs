use alloc::vec::Vec;

use num_bigint::BigInt;

use crate::algebra::Rational;

/// Last continued-fraction convergent of `x` whose denominator is at most
/// `max_denominator`.
pub fn rationalize_scalar(x: f64, max_denominator: u64) -> Rational {
    let max_den = max_denominator.max(1) as i128;
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut rest = x;
    for _ in 0..64 {
        let a = libm::floor(rest);
        if a.abs() > 1e18 {
            break;
        }
        let a_int = a as i128;
        let p2 = a_int * p1 + p0;
        let q2 = a_int * q1 + q0;
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = rest - a;
        if frac.abs() < 1e-15 {
            break;
        }
        rest = 1.0 / frac;
    }
    if q1 == 0 {
        return Rational::from_integer(BigInt::from(libm::round(x) as i64));
    }
    Rational::new(BigInt::from(p1), BigInt::from(q1))
}

/// Rounds a float direction to small-denominator rationals after scaling
/// its largest-magnitude coordinate to 1. The scale does not matter for
/// homogeneous systems, so a point with a simple rational direction comes
/// back exactly.
pub fn rationalize(y: &[f64], max_denominator: u64) -> Vec<Rational> {
    let pivot = y
        .iter()
        .copied()
        .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    if pivot == 0.0 {
        return y
            .iter()
            .map(|_| Rational::from_integer(BigInt::from(0)))
            .collect();
    }
    y.iter()
        .map(|&v| rationalize_scalar(v / pivot, max_denominator))
        .collect()
}
