//! Brute-force oracles for tiny instances. They share no code with the
//! reductions or the optimizers they are used to check.

use std::f64::consts::PI;

use num_traits::{Signed, Zero};
use spectral_threshold_core::algebra::{rat, rational_to_f64};
use spectral_threshold_core::reduce_box::{BoxWitness, Bq4eInstance};
use spectral_threshold_core::Polynomial;

use crate::error::{HarnessError, Result};

pub const DEFAULT_BOX_CAP: usize = 4;
pub const MAX_GRID_POINTS: u64 = 50_000_000;
pub const MAX_SPHERE_DIMENSION: usize = 3;

#[derive(Debug, Clone)]
pub struct BruteResult {
    /// First exact root met in scan order.
    pub found: Option<BoxWitness>,
    /// Smallest `|h|` seen on the grid. Heuristic only.
    pub min_abs: f64,
}

pub fn brute_bq4e(inst: &Bq4eInstance, grid: usize) -> Result<BruteResult> {
    brute_bq4e_capped(inst, grid, DEFAULT_BOX_CAP)
}

/// Scans `{-1, -1 + 2/grid, ..., 1}^n` with exact arithmetic, starting from
/// the all-ones corner.
pub fn brute_bq4e_capped(inst: &Bq4eInstance, grid: usize, cap: usize) -> Result<BruteResult> {
    let n = inst.n();
    if n > cap {
        return Err(HarnessError::Input(format!(
            "{n} variables exceeds the brute-force cap {cap}"
        )));
    }
    if grid < 2 {
        return Err(HarnessError::Input("grid must be at least 2".into()));
    }
    let points = (grid as u64 + 1)
        .checked_pow(n as u32)
        .filter(|&p| p <= MAX_GRID_POINTS);
    if points.is_none() {
        return Err(HarnessError::Input(format!(
            "grid {grid} in {n} variables is too large"
        )));
    }
    let ticks: Vec<_> = (0..=grid)
        .map(|k| rat(grid as i64 - 2 * k as i64, grid as i64))
        .collect();
    let mut idx = vec![0usize; n];
    let mut min_abs = f64::INFINITY;
    loop {
        let xi: Vec<_> = idx.iter().map(|&k| ticks[k].clone()).collect();
        let v = inst.h().eval(&xi)?;
        let a = rational_to_f64(&v.abs());
        if a < min_abs {
            min_abs = a;
        }
        if v.is_zero() {
            return Ok(BruteResult {
                found: Some(BoxWitness::new(xi)?),
                min_abs: 0.0,
            });
        }
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(BruteResult {
                    found: None,
                    min_abs,
                });
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] <= grid {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Maximum of `p` over a spherical grid with angular step `pi / grid`.
/// `S^0` is just `{-1, 1}`.
pub fn brute_sphere_max(p: &Polynomial, grid: usize) -> Result<f64> {
    let n = p.variable_count();
    if n == 0 || n > MAX_SPHERE_DIMENSION {
        return Err(HarnessError::Input(format!(
            "sphere oracle needs 1..={MAX_SPHERE_DIMENSION} variables, got {n}"
        )));
    }
    if grid == 0 {
        return Err(HarnessError::Input("grid must be positive".into()));
    }
    let terms: Vec<(Vec<u32>, f64)> = p
        .terms()
        .map(|(m, c)| (m.exponents(n), rational_to_f64(c)))
        .collect();
    let eval = |z: &[f64]| -> f64 {
        terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(z)
                    .fold(*c, |acc, (&k, &x)| acc * x.powi(k as i32))
            })
            .sum()
    };
    let step = PI / grid as f64;
    let mut best = f64::NEG_INFINITY;
    match n {
        1 => {
            best = eval(&[1.0]).max(eval(&[-1.0]));
        }
        2 => {
            for k in 0..2 * grid {
                let t = k as f64 * step;
                best = best.max(eval(&[t.cos(), t.sin()]));
            }
        }
        _ => {
            for i in 0..=grid {
                let theta = i as f64 * step;
                let (st, ct) = theta.sin_cos();
                for k in 0..2 * grid {
                    let phi = k as f64 * step;
                    best = best.max(eval(&[st * phi.cos(), st * phi.sin(), ct]));
                }
            }
        }
    }
    Ok(best)
}
