use alloc::vec::Vec;

use super::{dot, normalize, random_unit, restart_rng, AscentConfig, MaxEstimate};
use crate::algebra::rational_to_f64;
use crate::error::{Error, Result};
use crate::symtensor::{next_permutation, SymmetricTensor};

/// Upper limit on ordered nonzero entries expanded for the multilinear method.
const MAX_ORDERED_TERMS: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearEstimate {
    pub estimate: MaxEstimate,
    /// One unit vector per slot at the best point.
    pub slots: Vec<Vec<f64>>,
}

/// Every ordered index tuple with its value.
fn ordered_terms(t: &SymmetricTensor) -> Result<Vec<(Vec<usize>, f64)>> {
    let mut out = Vec::new();
    for (idx, v) in t.entries() {
        let v = rational_to_f64(v);
        let mut perm = idx.to_vec();
        loop {
            out.push((perm.clone(), v));
            if out.len() > MAX_ORDERED_TERMS {
                return Err(Error::input("tensor too large for the multilinear method"));
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
    }
    Ok(out)
}

fn contract_all(terms: &[(Vec<usize>, f64)], slots: &[Vec<f64>]) -> f64 {
    terms
        .iter()
        .map(|(idx, v)| idx.iter().zip(slots).fold(*v, |acc, (&i, x)| acc * x[i]))
        .sum()
}

/// `T(x_1, .., x_(k-1), ., x_(k+1), .., x_d)`.
fn contract_except(terms: &[(Vec<usize>, f64)], slots: &[Vec<f64>], k: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (idx, v) in terms {
        let mut w = *v;
        for (l, (&i, x)) in idx.iter().zip(slots).enumerate() {
            if l != k {
                w *= x[i];
            }
        }
        out[idx[k]] += w;
    }
}

/// Estimate of `max |T(x_1, ..., x_d)|` over unit slot vectors by alternating
/// slot updates (higher-order power method). Each update sets one slot to its
/// normalized partial contraction, which never decreases `|T|`.
pub fn maximize_multilinear(
    t: &SymmetricTensor,
    cfg: &AscentConfig,
) -> Result<MultilinearEstimate> {
    cfg.validate()?;
    let d = t.order();
    let n = t.dimension();
    if d < 2 {
        return Err(Error::input(
            "multilinear maximization needs order at least 2",
        ));
    }
    if n == 0 {
        return Err(Error::input("empty dimension"));
    }
    let terms = ordered_terms(t)?;
    let mut buf = alloc::vec![0.0; n];
    let mut best: Option<(f64, Vec<Vec<f64>>, usize, usize, bool)> = None;

    for k in 0..cfg.restarts {
        let mut rng = restart_rng(cfg.seed, k);
        let mut slots: Vec<Vec<f64>> = (0..d).map(|_| random_unit(&mut rng, n)).collect();
        let mut value = libm::fabs(contract_all(&terms, &slots));
        let mut converged = false;
        let mut iterations = 0;
        while iterations < cfg.max_iters {
            iterations += 1;
            let mut moved = 0.0f64;
            for s in 0..d {
                contract_except(&terms, &slots, s, &mut buf);
                if !normalize(&mut buf) {
                    continue;
                }
                let change = 1.0 - libm::fabs(dot(&buf, &slots[s]));
                moved = moved.max(change);
                slots[s].copy_from_slice(&buf);
            }
            let next = libm::fabs(contract_all(&terms, &slots));
            let gain = next - value;
            value = next;
            if libm::sqrt(2.0 * moved.max(0.0)) < cfg.step_tolerance
                || (gain.abs() < cfg.value_tolerance * value.max(1.0) && moved < 1e-12)
            {
                converged = true;
                break;
            }
        }
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, slots, iterations, k, converged));
        }
    }
    let (value, slots, iterations, k, converged) = best.expect("at least one restart");
    Ok(MultilinearEstimate {
        estimate: MaxEstimate {
            value,
            argmax: slots[0].clone(),
            iterations,
            restarts_used: cfg.restarts,
            best_restart: k,
            converged,
        },
        slots,
    })
}
