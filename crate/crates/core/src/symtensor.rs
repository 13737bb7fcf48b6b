//! Symmetric tensors stored as one value per sorted index tuple.
//!
//! An order-`d` symmetric tensor over `R^n` and a homogeneous degree-`d` form
//! determine each other: the form's coefficient on a monomial is the shared
//! tensor entry times the number of distinct orderings of its index tuple.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::algebra::{rational_to_f64, Monomial, Polynomial, Rational, SparseEvaluator};
use crate::error::{Error, Result};

/// Largest order for which multiplicities fit in a `u64`.
pub const MAX_ORDER: usize = 20;

/// Number of distinct permutations of a sorted index tuple,
/// `d! / prod_k (count of k)!`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MonomialCount(pub u64);

impl MonomialCount {
    pub fn of(indices: &[usize]) -> Self {
        assert!(indices.len() <= MAX_ORDER);
        let mut count = 1u64;
        // Build the multinomial incrementally: choose positions for each run.
        let mut placed = 0u64;
        let mut run = 0u64;
        for (k, &i) in indices.iter().enumerate() {
            run = if k > 0 && indices[k - 1] == i {
                run + 1
            } else {
                1
            };
            placed += 1;
            // count *= placed / run, exact at every step
            count = count * placed / run;
        }
        MonomialCount(count)
    }

    pub fn as_rational(self) -> Rational {
        Rational::from_integer(BigInt::from(self.0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricTensor {
    dimension: usize,
    order: usize,
    entries: BTreeMap<Vec<usize>, Rational>,
}

impl SymmetricTensor {
    pub fn zero(dimension: usize, order: usize) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::input(alloc::format!(
                "tensor order {order} outside 1..={MAX_ORDER}"
            )));
        }
        Ok(SymmetricTensor {
            dimension,
            order,
            entries: BTreeMap::new(),
        })
    }

    /// Builds a tensor from `(index tuple, value)` pairs. Tuples need not be
    /// sorted; repeated tuples are rejected.
    pub fn from_entries<I>(dimension: usize, order: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, Rational)>,
    {
        let mut t = SymmetricTensor::zero(dimension, order)?;
        for (mut idx, value) in entries {
            Error::check_dim(order, idx.len())?;
            if let Some(&bad) = idx.iter().find(|&&i| i >= dimension) {
                return Err(Error::input(alloc::format!(
                    "index {bad} out of range {dimension}"
                )));
            }
            idx.sort_unstable();
            if t.entries.contains_key(&idx) {
                return Err(Error::input(alloc::format!(
                    "duplicate tensor entry {idx:?}"
                )));
            }
            if !value.is_zero() {
                t.entries.insert(idx, value);
            }
        }
        Ok(t)
    }

    /// Polarization: the unique symmetric tensor with `T(z, ..., z) = p(z)`.
    pub fn from_form(p: &Polynomial, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::input("tensor order must be at least 1"));
        }
        if !p.is_homogeneous(order as u32) {
            return Err(Error::input(alloc::format!(
                "polynomial is not homogeneous of degree {order}"
            )));
        }
        let mut t = SymmetricTensor::zero(p.variable_count(), order)?;
        for (m, c) in p.terms() {
            let idx = m.indices();
            let value = c / MonomialCount::of(&idx).as_rational();
            t.entries.insert(idx, value);
        }
        Ok(t)
    }

    /// Inverse of [`SymmetricTensor::from_form`].
    pub fn to_form(&self) -> Polynomial {
        let mut p = Polynomial::zero(self.dimension);
        for (idx, v) in &self.entries {
            p.add_term(
                Monomial::from_indices(idx),
                v * MonomialCount::of(idx).as_rational(),
            );
        }
        p
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[usize], &Rational)> {
        self.entries.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn entry(&self, indices: &[usize]) -> Rational {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        self.entries
            .get(&idx)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.len()
    }

    /// `T(z, ..., z)`.
    pub fn eval_form(&self, z: &[Rational]) -> Result<Rational> {
        Error::check_dim(self.dimension, z.len())?;
        let mut ev = SparseEvaluator::new(z, self.order as u32);
        for (idx, v) in &self.entries {
            let weighted = v * MonomialCount::of(idx).as_rational();
            ev.add_term(&weighted, Monomial::from_indices(idx).factors());
        }
        Ok(ev.finish())
    }

    /// Full contraction `T(x_1, ..., x_d)`, expanding each stored entry over
    /// the distinct orderings of its index tuple.
    pub fn eval_multilinear(&self, slots: &[Vec<Rational>]) -> Result<Rational> {
        Error::check_dim(self.order, slots.len())?;
        for s in slots {
            Error::check_dim(self.dimension, s.len())?;
        }
        let mut acc = Rational::zero();
        for (idx, v) in &self.entries {
            let mut perm = idx.clone();
            let mut sum = Rational::zero();
            loop {
                let mut prod = Rational::one();
                for (slot, &i) in slots.iter().zip(&perm) {
                    if slot[i].is_zero() {
                        prod = Rational::zero();
                        break;
                    }
                    prod *= &slot[i];
                }
                sum += prod;
                if !next_permutation(&mut perm) {
                    break;
                }
            }
            acc += v * sum;
        }
        Ok(acc)
    }

    /// Sum of absolute form coefficients; bounds `|T(z,...,z)|` on the unit sphere.
    pub fn coefficient_l1(&self) -> f64 {
        self.entries
            .iter()
            .map(|(idx, v)| rational_to_f64(&v.abs()) * MonomialCount::of(idx).0 as f64)
            .sum()
    }
}

/// Advances `v` to the next lexicographic permutation; false once `v` was the
/// last one.
pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// `gamma_d^2 = (256 / d^4) (1/d)^(d-4)`, the squared factor relating the
/// sphere maximum of an order-`d` lift to that of the underlying quartic.
pub fn gamma_sq(d: usize) -> Rational {
    let d_big = BigInt::from(d as u64);
    let denom = num_traits::pow(d_big, d);
    Rational::new(BigInt::from(256u32), denom)
}

/// `gamma_d` in double precision.
pub fn gamma(d: usize) -> f64 {
    let d = d as f64;
    16.0 / (d * d) * libm::pow(1.0 / d, (d - 4.0) / 2.0)
}

/// A symmetric tensor paired with the threshold `B * gamma_d`, where the order
/// `d` of the tensor fixes `gamma_d` (`gamma_4 = 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdInstance {
    tensor: SymmetricTensor,
    threshold_base: Rational,
}

impl ThresholdInstance {
    pub fn new(tensor: SymmetricTensor, threshold_base: Rational) -> Result<Self> {
        if threshold_base < Rational::one() {
            return Err(Error::input("threshold base B must be at least 1"));
        }
        if tensor.order() < 4 {
            return Err(Error::input("threshold instances have order at least 4"));
        }
        Ok(ThresholdInstance {
            tensor,
            threshold_base,
        })
    }

    pub fn tensor(&self) -> &SymmetricTensor {
        &self.tensor
    }

    pub fn threshold_base(&self) -> &Rational {
        &self.threshold_base
    }

    pub fn order(&self) -> usize {
        self.tensor.order()
    }

    pub fn gamma_sq(&self) -> Rational {
        gamma_sq(self.order())
    }

    /// `alpha^2 = B^2 gamma_d^2`, exact.
    pub fn threshold_sq(&self) -> Rational {
        &self.threshold_base * &self.threshold_base * self.gamma_sq()
    }

    pub fn threshold_f64(&self) -> f64 {
        rational_to_f64(&self.threshold_base) * gamma(self.order())
    }

    /// Exact check that the direction of `y` reaches the threshold:
    /// `T(y,...,y)^2 >= alpha^2 |y|^(2d)`.
    pub fn certifies(&self, y: &[Rational]) -> Result<bool> {
        if y.iter().all(Zero::is_zero) {
            return Err(Error::input("witness must be nonzero"));
        }
        let value = self.tensor.eval_form(y)?;
        let norm_sq: Rational = y.iter().map(|v| v * v).fold(Rational::zero(), |a, b| a + b);
        let rhs = self.threshold_sq() * num_traits::pow(norm_sq, self.order());
        Ok(&value * &value >= rhs)
    }
}
