use alloc::vec::Vec;

use num_traits::Zero;

use super::poly::{Monomial, Polynomial};
use super::rational::Rational;
use crate::error::{Error, Result};

/// Symmetric rational matrix `Q` with `q(z) = z^T Q z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadraticForm {
    dimension: usize,
    entries: Vec<Rational>,
}

impl QuadraticForm {
    pub fn zeros(dimension: usize) -> Self {
        QuadraticForm {
            dimension,
            entries: alloc::vec![Rational::zero(); dimension * dimension],
        }
    }

    pub fn diagonal(diag: &[Rational]) -> Self {
        let mut q = QuadraticForm::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            q.entries[i * diag.len() + i] = d.clone();
        }
        q
    }

    /// Checks that `rows` is square and symmetric.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            Error::check_dim(n, row.len())?;
            entries.extend(row);
        }
        let q = QuadraticForm {
            dimension: n,
            entries,
        };
        for i in 0..n {
            for j in (i + 1)..n {
                if q.entry(i, j) != q.entry(j, i) {
                    return Err(Error::input(alloc::format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(q)
    }

    /// `ell ell^T`; vanishes exactly where `ell . y = 0`.
    pub fn rank_one(ell: &[Rational]) -> Result<Self> {
        if ell.iter().all(Zero::is_zero) {
            return Err(Error::input("rank_one_form of the zero vector"));
        }
        let n = ell.len();
        let mut q = QuadraticForm::zeros(n);
        for i in 0..n {
            for j in 0..n {
                q.entries[i * n + j] = &ell[i] * &ell[j];
            }
        }
        Ok(q)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.dimension + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        self.entries
            .chunks(self.dimension.max(1))
            .take(self.dimension)
    }

    /// Adds `c * y_i * y_j` to the form, splitting off-diagonal mass evenly
    /// between `(i, j)` and `(j, i)`.
    pub fn add_monomial(&mut self, i: usize, j: usize, c: &Rational) {
        let n = self.dimension;
        if i == j {
            self.entries[i * n + i] += c;
        } else {
            let half = c / Rational::from_integer(2.into());
            self.entries[i * n + j] += &half;
            self.entries[j * n + i] += half;
        }
    }

    /// Nonzero entries `(i, j, Q_ij)` in row-major order.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        let n = self.dimension;
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(move |(k, v)| (k / n, k % n, v))
    }

    /// Exact `z^T Q z`.
    pub fn eval(&self, z: &[Rational]) -> Result<Rational> {
        Error::check_dim(self.dimension, z.len())?;
        let mut acc = Rational::zero();
        for (i, j, q) in self.nonzeros() {
            if z[i].is_zero() || z[j].is_zero() {
                continue;
            }
            acc += q * &z[i] * &z[j];
        }
        Ok(acc)
    }

    /// Squared Frobenius norm `sum_ij Q_ij^2`.
    pub fn frobenius_sq(&self) -> Rational {
        self.nonzeros()
            .map(|(_, _, q)| q * q)
            .fold(Rational::zero(), |a, b| a + b)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    /// The form as a homogeneous quadratic polynomial.
    pub fn to_polynomial(&self) -> Polynomial {
        let mut p = Polynomial::zero(self.dimension);
        for (i, j, q) in self.nonzeros() {
            if i <= j {
                let c = if i == j {
                    q.clone()
                } else {
                    q * Rational::from_integer(2.into())
                };
                p.add_term(Monomial::from_indices(&[i, j]), c);
            }
        }
        p
    }

    /// Reads off the symmetric matrix of a homogeneous quadratic polynomial.
    pub fn from_polynomial(p: &Polynomial) -> Result<Self> {
        if !p.is_homogeneous(2) {
            return Err(Error::input("polynomial is not a quadratic form"));
        }
        let mut q = QuadraticForm::zeros(p.variable_count());
        for (m, c) in p.terms() {
            let idx = m.indices();
            q.add_monomial(idx[0], idx[1], c);
        }
        Ok(q)
    }

    pub fn to_f64_sparse(&self) -> Vec<(usize, usize, f64)> {
        self.nonzeros()
            .map(|(i, j, q)| (i, j, super::rational_to_f64(q)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    fn diag_pm() -> QuadraticForm {
        QuadraticForm::diagonal(&[rat(1, 1), rat(-1, 1)])
    }

    #[test]
    fn eval_examples() {
        assert_eq!(diag_pm().eval(&[rat(1, 1), rat(1, 1)]).unwrap(), rat(0, 1));
        assert_eq!(
            QuadraticForm::diagonal(&[rat(1, 1)])
                .eval(&[rat(3, 1)])
                .unwrap(),
            rat(9, 1)
        );
        assert_eq!(diag_pm().eval(&[rat(2, 1), rat(1, 1)]).unwrap(), rat(3, 1));
        assert!(diag_pm().eval(&[rat(1, 1)]).is_err());
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(diag_pm().frobenius_sq(), rat(2, 1));
        assert_eq!(QuadraticForm::zeros(3).frobenius_sq(), rat(0, 1));
        let q = QuadraticForm::from_rows(alloc::vec![
            alloc::vec![rat(1, 1), rat(2, 1)],
            alloc::vec![rat(2, 1), rat(1, 1)],
        ])
        .unwrap();
        assert_eq!(q.frobenius_sq(), rat(10, 1));
    }

    #[test]
    fn rank_one_examples() {
        let ell = [rat(1, 1), rat(-1, 1)];
        let q = QuadraticForm::rank_one(&ell).unwrap();
        let expected = QuadraticForm::from_rows(alloc::vec![
            alloc::vec![rat(1, 1), rat(-1, 1)],
            alloc::vec![rat(-1, 1), rat(1, 1)],
        ])
        .unwrap();
        assert_eq!(q, expected);
        assert_eq!(q.eval(&[rat(2, 1), rat(1, 1)]).unwrap(), rat(1, 1));
        let e1 = QuadraticForm::rank_one(&[rat(1, 1), rat(0, 1)]).unwrap();
        assert_eq!(e1.eval(&[rat(0, 1), rat(5, 1)]).unwrap(), rat(0, 1));
        assert!(QuadraticForm::rank_one(&[rat(0, 1), rat(0, 1)]).is_err());
    }

    #[test]
    fn rejects_asymmetric_and_ragged() {
        let asym = alloc::vec![
            alloc::vec![rat(1, 1), rat(1, 1)],
            alloc::vec![rat(0, 1), rat(1, 1)]
        ];
        assert!(QuadraticForm::from_rows(asym).is_err());
        let ragged = alloc::vec![alloc::vec![rat(1, 1)], alloc::vec![rat(0, 1), rat(1, 1)]];
        assert!(QuadraticForm::from_rows(ragged).is_err());
    }

    #[test]
    fn polynomial_round_trip() {
        let mut q = QuadraticForm::zeros(3);
        q.add_monomial(0, 2, &rat(3, 1));
        q.add_monomial(1, 1, &rat(-2, 5));
        let p = q.to_polynomial();
        assert_eq!(QuadraticForm::from_polynomial(&p).unwrap(), q);
        let z = [rat(1, 2), rat(-3, 1), rat(2, 7)];
        assert_eq!(p.eval(&z).unwrap(), q.eval(&z).unwrap());
    }
}
