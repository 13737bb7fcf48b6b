//! Double-precision maximization of homogeneous forms on the unit sphere.
//!
//! Everything here is a measurement. Estimates are lower bounds on the true
//! maximum (up to rounding) and never certify anything by themselves; exact
//! certification lives in [`crate::reduce_tensor::certify_max`]. The
//! [`rationalize`] bridge turns a near-feasible float point into rational
//! candidates for that exact check.

mod ascent;
mod multilinear;
mod objective;
mod rationalize;
mod residual;

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::reduce_tensor::QuarticCertificateData;
use crate::symtensor::SymmetricTensor;

pub use ascent::{maximize_sym, power_iteration, projected_gradient_ascent, AscentRun};
pub use multilinear::{maximize_multilinear, MultilinearEstimate};
pub use objective::{FormObjective, Negated, QuarticObjective, SphereObjective};
pub use rationalize::{rationalize, rationalize_scalar};
pub use residual::{residual_min, residual_min_restricted, ResidualObjective};

#[derive(Debug, Clone, PartialEq)]
pub struct AscentConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once an iterate moves less than this.
    pub step_tolerance: f64,
    /// Stop once the objective improves less than this.
    pub value_tolerance: f64,
    /// Power-method shift; `None` picks the objective's default.
    pub shift: Option<f64>,
    pub seed: u64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig {
            restarts: 32,
            max_iters: 3000,
            step_tolerance: 1e-13,
            value_tolerance: 1e-15,
            shift: None,
            seed: 0,
        }
    }
}

impl AscentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::input("restarts must be at least 1"));
        }
        if !(self.step_tolerance > 0.0 && self.value_tolerance > 0.0) {
            return Err(Error::input("tolerances must be positive"));
        }
        if let Some(s) = self.shift {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::input("shift must be finite and nonnegative"));
            }
        }
        Ok(())
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Best point found across restarts.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxEstimate {
    pub value: f64,
    /// Unit vector.
    pub argmax: Vec<f64>,
    /// Iterations of the winning restart.
    pub iterations: usize,
    pub restarts_used: usize,
    /// Index of the winning restart (lowest index on ties).
    pub best_restart: usize,
    pub converged: bool,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Scales `a` to unit length; returns false for the zero vector.
pub(crate) fn normalize(a: &mut [f64]) -> bool {
    let n = norm(a);
    if !(n > 0.0 && n.is_finite()) {
        return false;
    }
    for x in a.iter_mut() {
        *x /= n;
    }
    true
}

/// Seeded generator for restart `k`. Each restart has its own stream, so the
/// start points do not depend on execution order.
pub(crate) fn restart_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

/// Uniform point on the unit sphere via a normalized Gaussian draw.
pub(crate) fn random_unit(rng: &mut ChaCha8Rng, dimension: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dimension).map(|_| StandardNormal.sample(rng)).collect();
        if normalize(&mut v) {
            return v;
        }
    }
}

/// Gradient of `p = B |z|^4 - sum q_i^2`:
/// `4 B |z|^2 z - 4 sum q_i(z) Q_i z`.
pub fn grad_p(data: &QuarticCertificateData, z: &[f64]) -> Result<Vec<f64>> {
    Error::check_dim(data.dimension(), z.len())?;
    let obj = QuarticObjective::new(data);
    let mut g = alloc::vec![0.0; z.len()];
    obj.gradient(z, &mut g);
    Ok(g)
}

/// Sphere maximum of `p` for quartic certificate data.
pub fn maximize_quartic(data: &QuarticCertificateData, cfg: &AscentConfig) -> Result<MaxEstimate> {
    maximize_sym(&QuarticObjective::new(data), cfg)
}

/// Sphere maximum of `|T(z, ..., z)|`.
pub fn maximize_tensor(t: &SymmetricTensor, cfg: &AscentConfig) -> Result<MaxEstimate> {
    maximize_sym(&FormObjective::from_tensor(t), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, Polynomial, QuadraticForm};
    use crate::reduce_box::QuadraticSystem;
    use crate::reduce_tensor::{build_quartic, HqsfInstance};

    fn quartic(dim: usize, diag: &[i64]) -> QuarticCertificateData {
        let q = QuadraticForm::diagonal(&diag.iter().map(|&d| rat(d, 1)).collect::<Vec<_>>());
        build_quartic(&HqsfInstance::new(dim, alloc::vec![q]).unwrap()).unwrap()
    }

    fn cfg() -> AscentConfig {
        AscentConfig::default().with_restarts(8).with_seed(3)
    }

    #[test]
    fn grad_p_examples() {
        // p = 2 z^4 for q = z^2: gradient 8 z^3.
        let d = quartic(1, &[1]);
        assert_eq!(grad_p(&d, &[1.0]).unwrap(), alloc::vec![4.0]);
        let g = grad_p(&d, &[0.5]).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-15);
        assert!(grad_p(&d, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn grad_p_matches_finite_differences() {
        let d = quartic(3, &[1, 2, -3]);
        let z = [0.3, -0.7, 0.2];
        let g = grad_p(&d, &z).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let (mut a, mut b) = (z, z);
            a[i] += h;
            b[i] -= h;
            let fd = (d.p().eval_f64(&a) - d.p().eval_f64(&b)) / (2.0 * h);
            assert!(
                (fd - g[i]).abs() < 1e-6 * (1.0 + g[i].abs()),
                "{i}: {fd} vs {}",
                g[i]
            );
        }
    }

    #[test]
    fn maximize_examples() {
        let e = maximize_quartic(&quartic(2, &[1, -1]), &cfg()).unwrap();
        assert!((e.value - 3.0).abs() < 1e-6, "{}", e.value);
        assert!((e.argmax[0].abs() - e.argmax[1].abs()).abs() < 1e-4);
        let e = maximize_quartic(&quartic(1, &[1]), &cfg()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);

        let t = SymmetricTensor::from_form(&Polynomial::var(1, 0).pow(4), 4).unwrap();
        assert!((maximize_tensor(&t, &cfg()).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximize_takes_absolute_value() {
        // -z1^4 - z2^4 peaks in absolute value at 1 on the axes.
        let p = &Polynomial::var(2, 0).pow(4) + &Polynomial::var(2, 1).pow(4);
        let t = SymmetricTensor::from_form(&p.scale(&rat(-1, 1)), 4).unwrap();
        assert!((maximize_tensor(&t, &cfg()).unwrap().value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn multilinear_examples() {
        let t =
            SymmetricTensor::from_entries(2, 4, [(alloc::vec![1, 1, 1, 1], rat(1, 1))]).unwrap();
        assert!((maximize_multilinear(&t, &cfg()).unwrap().estimate.value - 1.0).abs() < 1e-9);
        let t = SymmetricTensor::from_form(quartic(2, &[1, -1]).p(), 4).unwrap();
        assert!((maximize_multilinear(&t, &cfg()).unwrap().estimate.value - 3.0).abs() < 1e-6);
        let t = SymmetricTensor::from_entries(
            2,
            2,
            [
                (alloc::vec![0, 0], rat(2, 1)),
                (alloc::vec![1, 1], rat(1, 1)),
            ],
        )
        .unwrap();
        assert!((maximize_multilinear(&t, &cfg()).unwrap().estimate.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn residual_examples() {
        let feasible = QuadraticSystem::from_forms(
            2,
            alloc::vec![QuadraticForm::diagonal(&[rat(1, 1), rat(-1, 1)])],
        )
        .unwrap();
        let e = residual_min(&feasible, &cfg()).unwrap();
        assert!(e.value < 1e-20, "{}", e.value);
        let definite = QuadraticSystem::from_forms(
            2,
            alloc::vec![QuadraticForm::diagonal(&[rat(1, 1), rat(2, 1)])],
        )
        .unwrap();
        assert!((residual_min(&definite, &cfg()).unwrap().value - 1.0).abs() < 1e-9);
        // With z1 held at zero the only sphere points are z2 = +-1.
        let e = residual_min_restricted(&feasible, &cfg(), &[0]).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        assert_eq!(e.argmax[0], 0.0);
        assert!(residual_min_restricted(&feasible, &cfg(), &[5]).is_err());
    }

    #[test]
    fn rationalize_recovers_simple_directions() {
        let s = libm::sqrt(2.0);
        assert_eq!(
            rationalize(&[1.0 / s, -1.0 / s], 100),
            alloc::vec![rat(1, 1), rat(-1, 1)]
        );
        assert_eq!(
            rationalize(&[0.6, 0.8, 0.0], 100),
            alloc::vec![rat(3, 4), rat(1, 1), rat(0, 1)]
        );
        assert_eq!(rationalize_scalar(0.333333333333, 1000), rat(1, 3));
        assert_eq!(rationalize_scalar(-2.5, 10), rat(-5, 2));
        assert_eq!(rationalize_scalar(core::f64::consts::PI, 100), rat(22, 7));
    }

    #[test]
    fn runs_are_deterministic_and_monotone() {
        let d = quartic(3, &[1, 2, -3]);
        let a = maximize_quartic(&d, &cfg()).unwrap();
        let b = maximize_quartic(&d, &cfg()).unwrap();
        assert_eq!(a, b);
        let obj = QuarticObjective::new(&d);
        let run = projected_gradient_ascent(&obj, &[0.6, 0.0, 0.8], &cfg());
        assert!(run.history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn config_validation() {
        assert!(AscentConfig::default().with_restarts(0).validate().is_err());
        let bad = AscentConfig {
            shift: Some(-1.0),
            ..AscentConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
