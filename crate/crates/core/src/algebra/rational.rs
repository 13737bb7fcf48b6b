use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

/// Shorthand for `numer/denom` from machine integers.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `"p/q"` or `"p"`. The result is canonicalized, so `"2/4"` reads as `1/2`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parsed = match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim())
                .map_err(|_| Error::input(alloc::format!("bad rational {s:?}")))?;
            let d = BigInt::from_str(d.trim())
                .map_err(|_| Error::input(alloc::format!("bad rational {s:?}")))?;
            if d.is_zero() {
                return Err(Error::input(alloc::format!("zero denominator in {s:?}")));
            }
            Rational::new(n, d)
        }
        None => Rational::from_integer(
            BigInt::from_str(s).map_err(|_| Error::input(alloc::format!("bad rational {s:?}")))?,
        ),
    };
    Ok(parsed)
}

/// Canonical `"p/q"` text, or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        alloc::format!("{}", r.numer())
    } else {
        alloc::format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact binary value of a finite double.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::input(alloc::format!("non-finite float {x}")))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Very large numerators and denominators overflow `to_f64` separately;
    // shift both down to comparable size first.
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Evaluates sums of `coeff * prod x_j^e_j` at a rational point using integer
/// arithmetic on a common denominator. Coefficients are grouped by their
/// denominator so only one rational reduction happens per distinct
/// denominator.
pub(crate) struct SparseEvaluator {
    /// Point scaled by the common denominator, as integers.
    scaled: Vec<BigInt>,
    common: BigInt,
    powers: Vec<Vec<BigInt>>,
    common_powers: Vec<BigInt>,
    max_degree: u32,
    groups: BTreeMap<BigInt, BigInt>,
}

impl SparseEvaluator {
    pub(crate) fn new(point: &[Rational], max_degree: u32) -> Self {
        let common = point
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let scaled: Vec<BigInt> = point
            .iter()
            .map(|x| x.numer() * (&common / x.denom()))
            .collect();
        let mut common_powers = Vec::with_capacity(max_degree as usize + 1);
        common_powers.push(BigInt::one());
        for k in 1..=max_degree as usize {
            let next = &common_powers[k - 1] * &common;
            common_powers.push(next);
        }
        SparseEvaluator {
            powers: scaled
                .iter()
                .map(|a| alloc::vec![BigInt::one(), a.clone()])
                .collect(),
            scaled,
            common,
            common_powers,
            max_degree,
            groups: BTreeMap::new(),
        }
    }

    fn power(&mut self, var: usize, exp: u32) -> &BigInt {
        let cache = &mut self.powers[var];
        while cache.len() <= exp as usize {
            let next = cache.last().unwrap() * &self.scaled[var];
            cache.push(next);
        }
        &cache[exp as usize]
    }

    /// Adds `coeff * prod x^e` for sparse exponents `(var, exp)`.
    pub(crate) fn add_term(&mut self, coeff: &Rational, exps: &[(usize, u32)]) {
        if coeff.is_zero() {
            return;
        }
        let mut degree = 0u32;
        let mut value = coeff.numer().clone();
        for &(var, e) in exps {
            degree += e;
            value *= self.power(var, e);
        }
        debug_assert!(degree <= self.max_degree);
        value *= &self.common_powers[(self.max_degree - degree) as usize];
        let slot = self
            .groups
            .entry(coeff.denom().clone())
            .or_insert_with(BigInt::zero);
        *slot += value;
    }

    pub(crate) fn finish(self) -> Rational {
        let mut total = Rational::zero();
        for (denom, numer) in self.groups {
            if !numer.is_zero() {
                total += Rational::new(numer, denom);
            }
        }
        if total.is_zero() {
            return total;
        }
        let scale = self.common_powers[self.max_degree as usize].clone();
        debug_assert!(scale.is_positive() && !self.common.is_zero());
        total / Rational::from_integer(scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("-3/4").unwrap(), rat(-3, 4));
        assert_eq!(parse_rational("2").unwrap(), rat(2, 1));
        assert_eq!(parse_rational("6/-8").unwrap(), rat(-3, 4));
        assert_eq!(format_rational(&rat(6, -8)), "-3/4");
        assert_eq!(format_rational(&rat(4, 2)), "2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn float_round_trip() {
        let r = rational_from_f64(0.375).unwrap();
        assert_eq!(r, rat(3, 8));
        assert_eq!(rational_to_f64(&r), 0.375);
        assert!(rational_from_f64(f64::NAN).is_err());
    }

    #[test]
    fn evaluator_matches_naive() {
        // 1/2 x0^2 x1 - 3 x1^3 + 5/3 at (2/3, -1/5)
        let point = [rat(2, 3), rat(-1, 5)];
        let mut ev = SparseEvaluator::new(&point, 3);
        ev.add_term(&rat(1, 2), &[(0, 2), (1, 1)]);
        ev.add_term(&rat(-3, 1), &[(1, 3)]);
        ev.add_term(&rat(5, 3), &[]);
        let expected = rat(1, 2) * rat(4, 9) * rat(-1, 5) - rat(3, 1) * rat(-1, 125) + rat(5, 3);
        assert_eq!(ev.finish(), expected);
    }
}
