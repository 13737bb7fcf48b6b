// Shared proptest strategies; included with `mod common;`.
#![allow(dead_code)]

use proptest::prelude::*;
use spectral_threshold_core::algebra::rat;
use spectral_threshold_core::{Polynomial, QuadraticForm, Rational};

pub fn rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=6).prop_map(|(p, q)| rat(p, q))
}

pub fn nonzero_rational() -> impl Strategy<Value = Rational> {
    rational().prop_filter("nonzero", |r| *r != rat(0, 1))
}

pub fn vector(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(rational(), n)
}

pub fn nonzero_vector(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    vector(n).prop_filter("nonzero", |v| v.iter().any(|x| *x != rat(0, 1)))
}

pub fn symmetric_form(n: usize) -> impl Strategy<Value = QuadraticForm> {
    prop::collection::vec(-4i64..=4, n * (n + 1) / 2).prop_map(move |vals| {
        let mut rows = vec![vec![rat(0, 1); n]; n];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                rows[i][j] = rat(vals[k], 1);
                rows[j][i] = rat(vals[k], 1);
                k += 1;
            }
        }
        QuadraticForm::from_rows(rows).unwrap()
    })
}

/// Random polynomial in `n` variables with total degree at most `max_deg`.
pub fn polynomial(n: usize, max_deg: u32) -> impl Strategy<Value = Polynomial> {
    let term = (prop::collection::vec(0u32..=max_deg, n), -5i64..=5);
    prop::collection::vec(term, 0..6).prop_map(move |terms| {
        let kept = terms
            .into_iter()
            .filter(|(e, _)| e.iter().sum::<u32>() <= max_deg)
            .map(|(e, c)| (e, rat(c, 1)));
        Polynomial::from_terms(n, kept).unwrap()
    })
}

/// Random form, homogeneous of degree `d`.
pub fn homogeneous(n: usize, d: u32) -> impl Strategy<Value = Polynomial> {
    let term = (
        prop::collection::vec(0usize..n, d as usize),
        -5i64..=5,
        1i64..=3,
    );
    prop::collection::vec(term, 1..6).prop_map(move |terms| {
        let mut p = Polynomial::zero(n);
        for (idx, c, q) in terms {
            let mut e = vec![0u32; n];
            for i in idx {
                e[i] += 1;
            }
            p = &p + &Polynomial::from_terms(n, [(e, rat(c, q))]).unwrap();
        }
        p
    })
}

pub fn norm_sq(z: &[Rational]) -> Rational {
    z.iter().fold(rat(0, 1), |acc, x| acc + x * x)
}
