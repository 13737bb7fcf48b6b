use alloc::collections::btree_map::{self, BTreeMap};
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::rational::{format_rational, Rational, SparseEvaluator};
use crate::error::{Error, Result};

/// A monomial as sorted `(variable, exponent)` pairs with no zero exponents.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(usize, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(index: usize) -> Self {
        Monomial(alloc::vec![(index, 1)])
    }

    /// Builds a monomial from a dense exponent vector.
    pub fn from_exponents(exponents: &[u32]) -> Self {
        Monomial(
            exponents
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| (i, e))
                .collect(),
        )
    }

    /// Builds a monomial from a list of variable indices, one entry per
    /// factor, e.g. `[0, 0, 2]` is `x0^2 x2`.
    pub fn from_indices(indices: &[usize]) -> Self {
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for &i in indices {
            *counts.entry(i).or_insert(0) += 1;
        }
        Monomial(counts.into_iter().collect())
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn factors(&self) -> &[(usize, u32)] {
        &self.0
    }

    pub fn exponent(&self, var: usize) -> u32 {
        self.0
            .iter()
            .find(|&&(v, _)| v == var)
            .map_or(0, |&(_, e)| e)
    }

    /// Dense exponent vector of the given length.
    pub fn exponents(&self, variable_count: usize) -> Vec<u32> {
        let mut dense = alloc::vec![0; variable_count];
        for &(v, e) in &self.0 {
            dense[v] = e;
        }
        dense
    }

    /// Sorted multiset of variable indices (`x0^2 x2` gives `[0, 0, 2]`).
    pub fn indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.degree() as usize);
        for &(v, e) in &self.0 {
            out.extend(core::iter::repeat_n(v, e as usize));
        }
        out
    }

    pub fn max_var(&self) -> Option<usize> {
        self.0.last().map(|&(v, _)| v)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = (self.0[i], other.0[j]);
            match a.0.cmp(&b.0) {
                core::cmp::Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                core::cmp::Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                core::cmp::Ordering::Equal => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// Renames variables through `map`.
    pub fn remap(&self, map: impl Fn(usize) -> usize) -> Monomial {
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for &(v, e) in &self.0 {
            *counts.entry(map(v)).or_insert(0) += e;
        }
        Monomial(counts.into_iter().collect())
    }
}

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// Terms with zero coefficient are never stored, so structural equality is
/// polynomial equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    variable_count: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(variable_count: usize) -> Self {
        Polynomial {
            variable_count,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(variable_count: usize, c: Rational) -> Self {
        let mut p = Polynomial::zero(variable_count);
        p.add_term(Monomial::one(), c);
        p
    }

    /// The coordinate polynomial `x_index`.
    pub fn var(variable_count: usize, index: usize) -> Self {
        assert!(
            index < variable_count,
            "variable {index} out of range {variable_count}"
        );
        let mut p = Polynomial::zero(variable_count);
        p.add_term(Monomial::var(index), Rational::one());
        p
    }

    /// Builds a polynomial from `(dense exponents, coefficient)` pairs,
    /// combining repeated monomials.
    pub fn from_terms<I>(variable_count: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = Polynomial::zero(variable_count);
        for (exps, c) in terms {
            if exps.len() != variable_count {
                return Err(Error::Dimension {
                    expected: variable_count,
                    got: exps.len(),
                });
            }
            p.add_term(Monomial::from_exponents(&exps), c);
        }
        Ok(p)
    }

    /// Adds `c * m`, dropping the term if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        if let Some(v) = m.max_var() {
            assert!(
                v < self.variable_count,
                "variable {v} out of range {}",
                self.variable_count
            );
        }
        match self.terms.entry(m) {
            btree_map::Entry::Vacant(slot) => {
                slot.insert(c);
            }
            btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn variable_count(&self) -> usize {
        self.variable_count
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Maximum monomial degree; the zero polynomial has degree 0.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// True iff every stored monomial has degree exactly `d`.
    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.terms.keys().all(|m| m.degree() == d)
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        Error::check_dim(self.variable_count, point.len())?;
        let mut ev = SparseEvaluator::new(point, self.total_degree());
        for (m, c) in &self.terms {
            ev.add_term(c, m.factors());
        }
        Ok(ev.finish())
    }

    /// Double-precision evaluation, for oracles and diagnostics only.
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.factors()
                    .iter()
                    .fold(super::rational_to_f64(c), |acc, &(v, e)| {
                        acc * libm::pow(point[v], e as f64)
                    })
            })
            .sum()
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.variable_count);
        }
        Polynomial {
            variable_count: self.variable_count,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut acc = Polynomial::constant(self.variable_count, Rational::one());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Moves the polynomial into `variable_count` variables, renaming each
    /// variable `v` to `map(v)`.
    pub fn embed(&self, variable_count: usize, map: impl Fn(usize) -> usize) -> Polynomial {
        let mut p = Polynomial::zero(variable_count);
        for (m, c) in &self.terms {
            p.add_term(m.remap(&map), c.clone());
        }
        p
    }
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.variable_count = out.variable_count.max(rhs.variable_count);
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.variable_count = out.variable_count.max(rhs.variable_count);
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial {
            variable_count: self.variable_count,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.variable_count.max(rhs.variable_count));
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // Highest degree first.
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| b.0.degree().cmp(&a.0.degree()).then_with(|| a.0.cmp(b.0)));
        for (k, (m, c)) in terms.into_iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            let unit = c.is_one() && m.degree() > 0;
            if !unit {
                write!(f, "({})", format_rational(c))?;
            }
            for (j, &(v, e)) in m.factors().iter().enumerate() {
                if j > 0 || !unit {
                    f.write_str("*")?;
                }
                if e == 1 {
                    write!(f, "x{v}")?;
                } else {
                    write!(f, "x{v}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    fn x1_sq_minus_1() -> Polynomial {
        let x = Polynomial::var(1, 0);
        &(&x * &x) - &Polynomial::constant(1, rat(1, 1))
    }

    #[test]
    fn eval_examples() {
        let p = x1_sq_minus_1();
        assert_eq!(p.eval(&[rat(1, 1)]).unwrap(), rat(0, 1));
        assert_eq!(p.eval(&[rat(1, 2)]).unwrap(), rat(-3, 4));
        assert_eq!(
            Polynomial::zero(3)
                .eval(&[rat(5, 7), rat(1, 1), rat(-2, 1)])
                .unwrap(),
            rat(0, 1)
        );
        assert!(matches!(
            p.eval(&[]),
            Err(Error::Dimension {
                expected: 1,
                got: 0
            })
        ));
    }

    #[test]
    fn degree_examples() {
        assert_eq!(x1_sq_minus_1().total_degree(), 2);
        let prod = (0..4).fold(Polynomial::constant(4, rat(1, 1)), |acc, i| {
            &acc * &Polynomial::var(4, i)
        });
        assert_eq!(prod.total_degree(), 4);
        assert_eq!(Polynomial::constant(2, rat(5, 1)).total_degree(), 0);
        assert_eq!(Polynomial::zero(2).total_degree(), 0);
    }

    #[test]
    fn homogeneity_examples() {
        let x1 = Polynomial::var(2, 0);
        let x2 = Polynomial::var(2, 1);
        let p = &(&x1 * &x1) * &(&x2 * &x2);
        assert!(p.is_homogeneous(4));
        assert!(!x1_sq_minus_1().is_homogeneous(2));
        assert!(Polynomial::zero(3).is_homogeneous(7));
    }

    #[test]
    fn cancellation_drops_terms() {
        let x = Polynomial::var(2, 0);
        let d = &x - &x;
        assert!(d.is_zero());
        assert_eq!(d, Polynomial::zero(2));
    }

    #[test]
    fn from_terms_combines_and_checks_length() {
        let p = Polynomial::from_terms(
            2,
            [
                (alloc::vec![1, 0], rat(1, 2)),
                (alloc::vec![1, 0], rat(1, 2)),
            ],
        )
        .unwrap();
        assert_eq!(p, Polynomial::var(2, 0));
        assert!(Polynomial::from_terms(2, [(alloc::vec![1], rat(1, 1))]).is_err());
    }

    #[test]
    fn display_is_readable() {
        let p = x1_sq_minus_1();
        assert_eq!(alloc::format!("{p}"), "x0^2 + (-1)");
    }

    #[test]
    fn monomial_helpers() {
        let m = Monomial::from_indices(&[2, 0, 0]);
        assert_eq!(m.factors(), &[(0, 2), (2, 1)]);
        assert_eq!(m.indices(), alloc::vec![0, 0, 2]);
        assert_eq!(m.exponents(3), alloc::vec![2, 0, 1]);
        assert_eq!(m.mul(&Monomial::var(1)).indices(), alloc::vec![0, 0, 1, 2]);
    }
}
