//! Homogeneous quadratic sphere feasibility to a symmetric tensor threshold.
//!
//! For forms `q_1..q_r` set `C = sum |Q_i|_F^2`, `B = C + 1` and
//! `p(z) = B |z|^4 - sum q_i(z)^2`. On the unit sphere `1 <= p <= B`, with
//! `p = B` exactly at common zeros of the `q_i`, so the system is feasible iff
//! the symmetric tensor of `p` has spectral norm at least `B`.

use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::algebra::{
    rational_from_f64, rational_to_f64, Monomial, Polynomial, QuadraticForm, Rational,
};
use crate::error::{Error, Result};
use crate::reduce_box::{QuadraticSystem, SystemMode};
use crate::symtensor::{gamma_sq, SymmetricTensor, ThresholdInstance};

/// Default cap on the number of variables for which `p` is expanded.
pub const DEFAULT_MAX_DIMENSION: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HqsfInstance {
    dimension: usize,
    forms: Vec<QuadraticForm>,
}

impl HqsfInstance {
    pub fn new(dimension: usize, forms: Vec<QuadraticForm>) -> Result<Self> {
        if forms.is_empty() {
            return Err(Error::input("HQSF instance needs at least one form"));
        }
        for f in &forms {
            Error::check_dim(dimension, f.dimension())?;
        }
        Ok(HqsfInstance { dimension, forms })
    }

    pub fn from_system(sys: &QuadraticSystem) -> Result<Self> {
        if sys.mode() != SystemMode::Homogeneous {
            return Err(Error::input("only homogeneous systems are HQSF instances"));
        }
        HqsfInstance::new(sys.dimension(), sys.forms().cloned().collect())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn forms(&self) -> &[QuadraticForm] {
        &self.forms
    }

    pub fn to_system(&self) -> QuadraticSystem {
        QuadraticSystem::from_forms(self.dimension, self.forms.clone())
            .expect("forms already validated")
    }
}

/// The quartic `p = B |z|^4 - sum q_i^2` together with the data it was built
/// from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuarticCertificateData {
    forms: Vec<QuadraticForm>,
    c: Rational,
    b: Rational,
    p: Polynomial,
}

impl QuarticCertificateData {
    pub fn forms(&self) -> &[QuadraticForm] {
        &self.forms
    }

    pub fn c(&self) -> &Rational {
        &self.c
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn p(&self) -> &Polynomial {
        &self.p
    }

    pub fn dimension(&self) -> usize {
        self.p.variable_count()
    }

    /// Reassembles data read back from storage, checking every stored field
    /// against a fresh construction.
    pub fn from_parts(
        forms: Vec<QuadraticForm>,
        c: Rational,
        b: Rational,
        p: Polynomial,
    ) -> Result<Self> {
        let dim = p.variable_count();
        let rebuilt = build_quartic_capped(&HqsfInstance::new(dim, forms)?, usize::MAX)?;
        if rebuilt.c != c || rebuilt.b != b || rebuilt.p != p {
            return Err(Error::input("quartic data is inconsistent with its forms"));
        }
        Ok(rebuilt)
    }
}

/// `|z|^2` as a polynomial.
pub fn norm_sq_poly(dimension: usize) -> Polynomial {
    let mut p = Polynomial::zero(dimension);
    for j in 0..dimension {
        p.add_term(Monomial::from_indices(&[j, j]), Rational::one());
    }
    p
}

pub fn build_quartic(inst: &HqsfInstance) -> Result<QuarticCertificateData> {
    build_quartic_capped(inst, DEFAULT_MAX_DIMENSION)
}

pub fn build_quartic_capped(
    inst: &HqsfInstance,
    max_dimension: usize,
) -> Result<QuarticCertificateData> {
    let n = inst.dimension;
    if n > max_dimension {
        return Err(Error::input(alloc::format!(
            "dimension {n} exceeds the expansion cap {max_dimension}"
        )));
    }
    let c = inst
        .forms
        .iter()
        .map(QuadraticForm::frobenius_sq)
        .fold(Rational::zero(), |a, b| a + b);
    let b = &c + Rational::one();
    let norm = norm_sq_poly(n);
    let mut p = (&norm * &norm).scale(&b);
    for q in &inst.forms {
        let qp = q.to_polynomial();
        p = &p - &(&qp * &qp);
    }
    Ok(QuarticCertificateData {
        forms: inst.forms.clone(),
        c,
        b,
        p,
    })
}

/// True iff `p(z) = B |z|^4` exactly, i.e. every `q_i(z) = 0`. No
/// normalization of `z` is needed since both sides are quartic.
pub fn certify_max(data: &QuarticCertificateData, z: &[Rational]) -> Result<bool> {
    Error::check_dim(data.dimension(), z.len())?;
    if z.iter().all(Zero::is_zero) {
        return Err(Error::input("certificate point must be nonzero"));
    }
    let norm_sq: Rational = z.iter().map(|v| v * v).fold(Rational::zero(), |a, b| a + b);
    let value = data.p.eval(z)?;
    Ok(value == &data.b * &norm_sq * &norm_sq)
}

pub fn tensorize(data: &QuarticCertificateData) -> ThresholdInstance {
    let tensor = SymmetricTensor::from_form(&data.p, 4).expect("p is a quartic form");
    ThresholdInstance::new(tensor, data.b.clone()).expect("B >= 1 and order 4")
}

/// `p_d(z, t) = p(z) * t_1 ... t_(d-4)` with its exact squared threshold
/// factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderLift {
    pub d: usize,
    pub p_d: Polynomial,
    pub gamma_sq: Rational,
    pub threshold_base: Rational,
}

impl OrderLift {
    pub fn threshold_instance(&self) -> Result<ThresholdInstance> {
        ThresholdInstance::new(
            SymmetricTensor::from_form(&self.p_d, self.d)?,
            self.threshold_base.clone(),
        )
    }

    /// `B * gamma_d` in double precision.
    pub fn threshold_f64(&self) -> f64 {
        rational_to_f64(&self.threshold_base) * crate::symtensor::gamma(self.d)
    }
}

pub fn lift_order(data: &QuarticCertificateData, d: usize) -> Result<OrderLift> {
    if d < 4 {
        return Err(Error::input(alloc::format!("lift order {d} is below 4")));
    }
    let n = data.dimension();
    let total = n + (d - 4);
    let mut p_d = data.p.embed(total, |v| v);
    for k in 0..(d - 4) {
        p_d = &p_d * &Polynomial::var(total, n + k);
    }
    Ok(OrderLift {
        d,
        p_d,
        gamma_sq: gamma_sq(d),
        threshold_base: data.b.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// An exact rational point reaches the threshold.
    CertifiedYes,
    /// The float estimate is at or within tolerance of the threshold.
    NumericallyAbove,
    /// The float estimate is below the threshold by more than the tolerance.
    NumericallyBelow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdComparison {
    pub verdict: Verdict,
    pub estimate: f64,
    pub threshold: f64,
    /// `threshold - estimate`.
    pub margin: f64,
    pub tolerance: f64,
}

/// Compares a sphere-maximum estimate against `alpha = B gamma_d`.
///
/// A witness that [`ThresholdInstance::certifies`] yields `CertifiedYes`.
/// Otherwise the estimate counts as above when
/// `estimate >= alpha (1 - tolerance)`, checked on squares in exact rationals.
pub fn threshold_compare(
    inst: &ThresholdInstance,
    estimate: f64,
    witness: Option<&[Rational]>,
    tolerance: f64,
) -> Result<ThresholdComparison> {
    let threshold = inst.threshold_f64();
    let mut out = ThresholdComparison {
        verdict: Verdict::NumericallyBelow,
        estimate,
        threshold,
        margin: threshold - estimate,
        tolerance,
    };
    if let Some(y) = witness {
        if inst.certifies(y)? {
            out.verdict = Verdict::CertifiedYes;
            return Ok(out);
        }
    }
    if !(0.0..1.0).contains(&tolerance) {
        return Err(Error::input("tolerance must lie in [0, 1)"));
    }
    let est = rational_from_f64(estimate)?;
    let slack = Rational::one() - rational_from_f64(tolerance)?;
    if !est.is_negative() && &est * &est >= inst.threshold_sq() * &slack * &slack {
        out.verdict = Verdict::NumericallyAbove;
    }
    Ok(out)
}
