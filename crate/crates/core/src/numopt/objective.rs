use alloc::vec::Vec;

use crate::algebra::{rational_to_f64, Polynomial};
use crate::reduce_tensor::QuarticCertificateData;
use crate::symtensor::{MonomialCount, SymmetricTensor};

/// A homogeneous function to be maximized over the unit sphere.
pub trait SphereObjective {
    fn dimension(&self) -> usize;
    fn degree(&self) -> usize;
    fn value(&self, z: &[f64]) -> f64;
    /// Writes the Euclidean gradient into `out`.
    fn gradient(&self, z: &[f64], out: &mut [f64]);
    /// Shift making the power map monotone.
    fn default_shift(&self) -> f64;
    /// True when the objective is known to be nonnegative on the sphere, so
    /// maximizing `|f|` reduces to maximizing `f`.
    fn nonnegative(&self) -> bool {
        false
    }
}

/// `B |z|^4 - sum_i (z^T Q_i z)^2`, evaluated through the forms rather than
/// the expanded polynomial.
#[derive(Debug, Clone)]
pub struct QuarticObjective {
    dimension: usize,
    b: f64,
    forms: Vec<Vec<(usize, usize, f64)>>,
}

impl QuarticObjective {
    pub fn new(data: &QuarticCertificateData) -> Self {
        QuarticObjective {
            dimension: data.dimension(),
            b: rational_to_f64(data.b()),
            forms: data.forms().iter().map(|q| q.to_f64_sparse()).collect(),
        }
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    fn quad(form: &[(usize, usize, f64)], z: &[f64]) -> f64 {
        form.iter().map(|&(i, j, q)| q * z[i] * z[j]).sum()
    }
}

impl SphereObjective for QuarticObjective {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn degree(&self) -> usize {
        4
    }

    fn value(&self, z: &[f64]) -> f64 {
        let n2 = super::dot(z, z);
        let penalty: f64 = self
            .forms
            .iter()
            .map(|f| {
                let q = Self::quad(f, z);
                q * q
            })
            .sum();
        self.b * n2 * n2 - penalty
    }

    fn gradient(&self, z: &[f64], out: &mut [f64]) {
        let n2 = super::dot(z, z);
        for (o, &zi) in out.iter_mut().zip(z) {
            *o = 4.0 * self.b * n2 * zi;
        }
        for f in &self.forms {
            let q = Self::quad(f, z);
            if q == 0.0 {
                continue;
            }
            for &(i, j, v) in f {
                out[i] -= 4.0 * q * v * z[j];
            }
        }
    }

    fn default_shift(&self) -> f64 {
        2.0 * self.b
    }

    fn nonnegative(&self) -> bool {
        true
    }
}

/// A homogeneous polynomial in monomial form.
#[derive(Debug, Clone)]
pub struct FormObjective {
    dimension: usize,
    degree: usize,
    terms: Vec<(f64, Vec<(usize, u32)>)>,
}

fn ipow(x: f64, e: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..e {
        acc *= x;
    }
    acc
}

impl FormObjective {
    /// `p` must be homogeneous; its degree is taken from its terms.
    pub fn from_polynomial(p: &Polynomial) -> Self {
        FormObjective {
            dimension: p.variable_count(),
            degree: p.total_degree() as usize,
            terms: p
                .terms()
                .map(|(m, c)| (rational_to_f64(c), m.factors().to_vec()))
                .collect(),
        }
    }

    pub fn from_tensor(t: &SymmetricTensor) -> Self {
        let terms = t
            .entries()
            .map(|(idx, v)| {
                let m = crate::algebra::Monomial::from_indices(idx);
                (
                    rational_to_f64(v) * MonomialCount::of(idx).0 as f64,
                    m.factors().to_vec(),
                )
            })
            .collect();
        FormObjective {
            dimension: t.dimension(),
            degree: t.order(),
            terms,
        }
    }

    fn coefficient_l1(&self) -> f64 {
        self.terms.iter().map(|(c, _)| libm::fabs(*c)).sum()
    }
}

impl SphereObjective for FormObjective {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn degree(&self) -> usize {
        self.degree
    }

    fn value(&self, z: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, f)| f.iter().fold(*c, |acc, &(v, e)| acc * ipow(z[v], e)))
            .sum()
    }

    fn gradient(&self, z: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (c, f) in &self.terms {
            for (k, &(v, e)) in f.iter().enumerate() {
                let mut d = c * e as f64 * ipow(z[v], e - 1);
                for (l, &(w, ew)) in f.iter().enumerate() {
                    if l != k {
                        d *= ipow(z[w], ew);
                    }
                }
                out[v] += d;
            }
        }
    }

    fn default_shift(&self) -> f64 {
        self.coefficient_l1()
    }
}

/// `-f`, for the negative side of `max |f|`.
#[derive(Debug, Clone)]
pub struct Negated<'a, O>(pub &'a O);

impl<O: SphereObjective> SphereObjective for Negated<'_, O> {
    fn dimension(&self) -> usize {
        self.0.dimension()
    }

    fn degree(&self) -> usize {
        self.0.degree()
    }

    fn value(&self, z: &[f64]) -> f64 {
        -self.0.value(z)
    }

    fn gradient(&self, z: &[f64], out: &mut [f64]) {
        self.0.gradient(z, out);
        out.iter_mut().for_each(|o| *o = -*o);
    }

    fn default_shift(&self) -> f64 {
        self.0.default_shift()
    }
}
