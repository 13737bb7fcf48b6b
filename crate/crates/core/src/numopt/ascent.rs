use alloc::vec::Vec;

use super::objective::{Negated, SphereObjective};
use super::{dot, norm, normalize, random_unit, restart_rng, AscentConfig, MaxEstimate};
use crate::error::{Error, Result};

/// Result of one local run from a single start.
#[derive(Debug, Clone, PartialEq)]
pub struct AscentRun {
    pub value: f64,
    pub z: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after every accepted step, starting point first.
    pub history: Vec<f64>,
}

const ARMIJO: f64 = 1e-4;

/// Gradient ascent on the sphere: step along the tangent gradient, retract by
/// normalization, backtrack until the Armijo condition holds.
pub fn projected_gradient_ascent<O: SphereObjective>(
    obj: &O,
    z0: &[f64],
    cfg: &AscentConfig,
) -> AscentRun {
    let n = obj.dimension();
    let mut z = z0.to_vec();
    normalize(&mut z);
    let mut f = obj.value(&z);
    let mut history = alloc::vec![f];
    let mut g = alloc::vec![0.0; n];
    let mut trial = alloc::vec![0.0; n];
    let scale = (obj.degree() as f64 * obj.default_shift()).max(1.0);
    let mut eta = 1.0 / scale;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        iterations += 1;
        obj.gradient(&z, &mut g);
        let radial = dot(&g, &z);
        for (gi, zi) in g.iter_mut().zip(&z) {
            *gi -= radial * zi;
        }
        let gnorm_sq = dot(&g, &g);
        if !(gnorm_sq > 0.0) {
            converged = true;
            break;
        }
        let gnorm = libm::sqrt(gnorm_sq);
        let mut accepted = None;
        loop {
            if eta * gnorm < cfg.step_tolerance {
                break;
            }
            for ((t, zi), gi) in trial.iter_mut().zip(&z).zip(&g) {
                *t = zi + eta * gi;
            }
            normalize(&mut trial);
            let ft = obj.value(&trial);
            if ft >= f + ARMIJO * eta * gnorm_sq {
                accepted = Some(ft);
                break;
            }
            eta *= 0.5;
        }
        let Some(ft) = accepted else {
            converged = true;
            break;
        };
        let step: f64 = trial
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        let improvement = ft - f;
        core::mem::swap(&mut z, &mut trial);
        f = ft;
        history.push(f);
        eta *= 2.0;
        if libm::sqrt(step) < cfg.step_tolerance
            || improvement < cfg.value_tolerance * f.abs().max(1.0)
        {
            converged = true;
            break;
        }
    }
    AscentRun {
        value: f,
        z,
        iterations,
        converged,
        history,
    }
}

/// Shifted symmetric power iteration `z <- normalize(grad f(z) / d + shift z)`.
/// Stops if a step would decrease the objective.
pub fn power_iteration<O: SphereObjective>(
    obj: &O,
    z0: &[f64],
    shift: f64,
    cfg: &AscentConfig,
) -> AscentRun {
    let n = obj.dimension();
    let d = obj.degree() as f64;
    let mut z = z0.to_vec();
    normalize(&mut z);
    let mut f = obj.value(&z);
    let mut history = alloc::vec![f];
    let mut g = alloc::vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        obj.gradient(&z, &mut g);
        let mut next: Vec<f64> = g
            .iter()
            .zip(&z)
            .map(|(gi, zi)| gi / d + shift * zi)
            .collect();
        if !normalize(&mut next) {
            converged = true;
            break;
        }
        let fn_ = obj.value(&next);
        if fn_ < f {
            converged = true;
            break;
        }
        let step = norm(&next.iter().zip(&z).map(|(a, b)| a - b).collect::<Vec<_>>());
        z = next;
        f = fn_;
        history.push(f);
        if step < cfg.step_tolerance {
            converged = true;
            break;
        }
    }
    AscentRun {
        value: f,
        z,
        iterations,
        converged,
        history,
    }
}

fn best_local<O: SphereObjective>(
    obj: &O,
    z0: &[f64],
    shift: f64,
    cfg: &AscentConfig,
) -> AscentRun {
    let pga = projected_gradient_ascent(obj, z0, cfg);
    let pow = power_iteration(obj, z0, shift, cfg);
    // A final gradient polish from the power-method point.
    let polished = projected_gradient_ascent(obj, &pow.z, cfg);
    let mut best = pga;
    for cand in [pow, polished] {
        if cand.value > best.value {
            best = cand;
        }
    }
    best
}

/// Best-of-restarts estimate of `max_{|z|=1} |f(z)|`.
pub fn maximize_sym<O: SphereObjective>(obj: &O, cfg: &AscentConfig) -> Result<MaxEstimate> {
    cfg.validate()?;
    if obj.degree() < 2 {
        return Err(Error::input("sphere maximization needs degree at least 2"));
    }
    if obj.dimension() == 0 {
        return Err(Error::input("empty dimension"));
    }
    let shift = cfg.shift.unwrap_or_else(|| obj.default_shift());
    let both_signs = !obj.nonnegative() && obj.degree().is_multiple_of(2);
    let mut best: Option<(f64, AscentRun, usize)> = None;
    for k in 0..cfg.restarts {
        let mut rng = restart_rng(cfg.seed, k);
        let z0 = random_unit(&mut rng, obj.dimension());
        let mut cands = alloc::vec![best_local(obj, &z0, shift, cfg)];
        if both_signs {
            let mut neg = best_local(&Negated(obj), &z0, shift, cfg);
            neg.value = -neg.value;
            cands.push(neg);
        }
        for run in cands {
            let score = libm::fabs(run.value);
            if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
                best = Some((score, run, k));
            }
        }
    }
    let (_, run, k) = best.expect("at least one restart");
    let mut argmax = run.z;
    normalize(&mut argmax);
    Ok(MaxEstimate {
        value: libm::fabs(obj.value(&argmax)),
        argmax,
        iterations: run.iterations,
        restarts_used: cfg.restarts,
        best_restart: k,
        converged: run.converged,
    })
}
