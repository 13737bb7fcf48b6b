use alloc::vec::Vec;

use super::{dot, normalize, random_unit, restart_rng, AscentConfig, MaxEstimate};
use crate::algebra::rational_to_f64;
use crate::error::{Error, Result};
use crate::reduce_box::QuadraticSystem;

struct FloatConstraint {
    quad: Vec<(usize, usize, f64)>,
    linear: Vec<(usize, f64)>,
    constant: f64,
}

/// `R(y) = sum_i g_i(y)^2` over the constraints of a quadratic system.
pub struct ResidualObjective {
    dimension: usize,
    constraints: Vec<FloatConstraint>,
}

impl ResidualObjective {
    pub fn new(sys: &QuadraticSystem) -> Self {
        let constraints = sys
            .constraints()
            .iter()
            .map(|c| {
                let (linear, constant) = match &c.affine {
                    Some(a) => (
                        a.linear
                            .iter()
                            .enumerate()
                            .filter(|(_, l)| !num_traits::Zero::is_zero(*l))
                            .map(|(i, l)| (i, rational_to_f64(l)))
                            .collect(),
                        rational_to_f64(&a.constant),
                    ),
                    None => (Vec::new(), 0.0),
                };
                FloatConstraint {
                    quad: c.form.to_f64_sparse(),
                    linear,
                    constant,
                }
            })
            .collect();
        ResidualObjective {
            dimension: sys.dimension(),
            constraints,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    fn constraint_value(c: &FloatConstraint, y: &[f64]) -> f64 {
        let q: f64 = c.quad.iter().map(|&(i, j, v)| v * y[i] * y[j]).sum();
        let l: f64 = c.linear.iter().map(|&(i, v)| v * y[i]).sum();
        q + l + c.constant
    }

    pub fn values(&self, y: &[f64]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| Self::constraint_value(c, y))
            .collect()
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| {
                let g = Self::constraint_value(c, y);
                g * g
            })
            .sum()
    }

    /// Dense Jacobian, one row per constraint.
    fn jacobian(&self, y: &[f64]) -> Vec<Vec<f64>> {
        self.constraints
            .iter()
            .map(|c| {
                let mut row = alloc::vec![0.0; self.dimension];
                for &(i, j, v) in &c.quad {
                    row[i] += 2.0 * v * y[j];
                }
                for &(i, v) in &c.linear {
                    row[i] += v;
                }
                row
            })
            .collect()
    }
}

/// In-place Cholesky solve of `a x = b` for symmetric positive definite `a`
/// (row-major, `n x n`). Returns false if `a` is not numerically SPD.
fn cholesky_solve(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return false;
        }
        let d = libm::sqrt(d);
        a[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    true
}

struct RunOutcome {
    value: f64,
    y: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// Levenberg-Marquardt on the sphere: damped Gauss-Newton steps in the
/// tangent space, retracted by normalization. Coordinates with
/// `free[i] == false` stay at zero.
fn lm_run(obj: &ResidualObjective, y0: &[f64], free: &[bool], cfg: &AscentConfig) -> RunOutcome {
    let n = obj.dimension;
    let mut y: Vec<f64> = y0
        .iter()
        .zip(free)
        .map(|(v, &f)| if f { *v } else { 0.0 })
        .collect();
    normalize(&mut y);
    let mut r = obj.values(&y);
    let mut value = dot(&r, &r);
    let mut mu: Option<f64> = None;
    let mut a = alloc::vec![0.0; n * n];
    let mut rhs = alloc::vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        iterations += 1;
        if value < 1e-300 {
            converged = true;
            break;
        }
        let mut jac = obj.jacobian(&y);
        for row in jac.iter_mut() {
            let radial = dot(row, &y);
            for ((x, yi), &f) in row.iter_mut().zip(&y).zip(free) {
                *x = if f { *x - radial * yi } else { 0.0 };
            }
        }
        let mut max_diag = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let s: f64 = jac.iter().map(|row| row[i] * row[j]).sum();
                a[i * n + j] = s;
                a[j * n + i] = s;
            }
            max_diag = max_diag.max(a[i * n + i]);
            rhs[i] = -jac.iter().zip(&r).map(|(row, ri)| row[i] * ri).sum::<f64>();
        }
        if max_diag == 0.0 {
            converged = true;
            break;
        }
        let damping = *mu.get_or_insert(1e-3 * max_diag);
        let mut accepted = false;
        let mut damping = damping;
        while damping < 1e20 * max_diag.max(1.0) {
            let mut m = a.clone();
            let mut step = rhs.clone();
            for i in 0..n {
                if free[i] {
                    m[i * n + i] += damping;
                } else {
                    for j in 0..n {
                        m[i * n + j] = 0.0;
                        m[j * n + i] = 0.0;
                    }
                    m[i * n + i] = 1.0;
                    step[i] = 0.0;
                }
            }
            if !cholesky_solve(&mut m, &mut step, n) {
                damping *= 4.0;
                continue;
            }
            let radial = dot(&step, &y);
            let mut trial: Vec<f64> = y
                .iter()
                .zip(&step)
                .zip(free)
                .map(|((yi, si), &f)| if f { yi + si - radial * yi } else { 0.0 })
                .collect();
            normalize(&mut trial);
            let rt = obj.values(&trial);
            let vt = dot(&rt, &rt);
            if vt < value {
                let moved: f64 = libm::sqrt(
                    trial
                        .iter()
                        .zip(&y)
                        .map(|(p, q)| (p - q) * (p - q))
                        .sum::<f64>(),
                );
                let gain = value - vt;
                y = trial;
                r = rt;
                value = vt;
                mu = Some((damping / 3.0).max(1e-18 * max_diag));
                accepted = true;
                if moved < cfg.step_tolerance || gain < cfg.value_tolerance * value {
                    converged = true;
                }
                break;
            }
            damping *= 4.0;
        }
        if !accepted {
            converged = true;
        }
        if converged {
            break;
        }
        if let Some(m) = mu.as_mut() {
            *m = m.max(1e-18);
        }
    }
    RunOutcome {
        value,
        y,
        iterations,
        converged,
    }
}

/// Minimum of `sum_i g_i(y)^2` over the unit sphere, best of restarts.
pub fn residual_min(sys: &QuadraticSystem, cfg: &AscentConfig) -> Result<MaxEstimate> {
    residual_min_restricted(sys, cfg, &[])
}

/// As [`residual_min`], with the listed coordinates held at zero.
pub fn residual_min_restricted(
    sys: &QuadraticSystem,
    cfg: &AscentConfig,
    zero_coords: &[usize],
) -> Result<MaxEstimate> {
    cfg.validate()?;
    let n = sys.dimension();
    let mut free = alloc::vec![true; n];
    for &i in zero_coords {
        if i >= n {
            return Err(Error::input(alloc::format!(
                "coordinate {i} out of range {n}"
            )));
        }
        free[i] = false;
    }
    if !free.iter().any(|&f| f) {
        return Err(Error::input("every coordinate is fixed at zero"));
    }
    let obj = ResidualObjective::new(sys);
    let mut best: Option<(RunOutcome, usize)> = None;
    for k in 0..cfg.restarts {
        let mut rng = restart_rng(cfg.seed, k);
        let y0 = random_unit(&mut rng, n);
        let run = lm_run(&obj, &y0, &free, cfg);
        if best.as_ref().is_none_or(|(b, _)| run.value < b.value) {
            best = Some((run, k));
        }
    }
    let (run, k) = best.expect("at least one restart");
    Ok(MaxEstimate {
        value: run.value,
        argmax: run.y,
        iterations: run.iterations,
        restarts_used: cfg.restarts,
        best_restart: k,
        converged: run.converged,
    })
}
