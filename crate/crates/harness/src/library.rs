//! Instances whose status is known independently of any solver.
//!
//! YES instances carry a box root with coordinates in {0, ±1}, so the forward
//! map stays rational. NO instances carry a structural positivity proof that
//! [`LibraryInstance::check_provenance`] re-verifies exactly.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use spectral_threshold_core::algebra::rat;
use spectral_threshold_core::reduce_box::{BoxWitness, Bq4eInstance};
use spectral_threshold_core::reduce_tensor::HqsfInstance;
use spectral_threshold_core::{Polynomial, QuadraticForm, Rational};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Yes,
    No,
    Unknown,
}

/// Why `h` has no real root at all, let alone one in the box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoProof {
    /// `h = g^2 + c` with `c > 0`.
    SquarePlusConstant { g: Polynomial, c: Rational },
    /// Every monomial has only even exponents, every coefficient is
    /// nonnegative and the constant term is positive.
    EvenPowerSum,
}

#[derive(Debug, Clone)]
pub struct LibraryInstance {
    pub name: &'static str,
    pub bq4e: Bq4eInstance,
    pub status: Status,
    pub witness: Option<BoxWitness>,
    pub provenance: &'static str,
    pub proof: Option<NoProof>,
}

impl LibraryInstance {
    /// Re-derives the recorded status: YES witnesses must be exact roots in
    /// the box, NO proofs must hold as polynomial identities.
    pub fn check_provenance(&self) -> Result<()> {
        let fail = |why: &str| Err(HarnessError::Input(format!("{}: {why}", self.name)));
        match self.status {
            Status::Yes => {
                let Some(w) = &self.witness else {
                    return fail("yes without witness");
                };
                if !self.bq4e.h().eval(w.coords())?.is_zero() {
                    return fail("witness is not a root");
                }
                Ok(())
            }
            Status::No => match &self.proof {
                None => fail("no without proof"),
                Some(NoProof::SquarePlusConstant { g, c }) => {
                    let rebuilt = &(g * g) + &Polynomial::constant(g.variable_count(), c.clone());
                    if !c.is_positive() || &rebuilt != self.bq4e.h() {
                        return fail("h is not g^2 + c with c > 0");
                    }
                    Ok(())
                }
                Some(NoProof::EvenPowerSum) => {
                    if even_power_sum(self.bq4e.h()) {
                        Ok(())
                    } else {
                        fail("h is not a positive even-power sum")
                    }
                }
            },
            Status::Unknown => Ok(()),
        }
    }
}

fn even_power_sum(h: &Polynomial) -> bool {
    let mut constant = Rational::zero();
    for (m, c) in h.terms() {
        if m.degree() == 0 {
            constant = c.clone();
        }
        if c.is_negative() || m.factors().iter().any(|&(_, e)| e % 2 == 1) {
            return false;
        }
    }
    constant.is_positive()
}

fn poly(n: usize, terms: &[(&[u32], i64)]) -> Polynomial {
    Polynomial::from_terms(n, terms.iter().map(|(e, c)| (e.to_vec(), rat(*c, 1))))
        .expect("static terms")
}

fn box_point(xi: &[i64]) -> BoxWitness {
    BoxWitness::new(xi.iter().map(|&x| rat(x, 1)).collect()).expect("static witness")
}

fn yes(name: &'static str, h: Polynomial, xi: &[i64], provenance: &'static str) -> LibraryInstance {
    LibraryInstance {
        name,
        bq4e: Bq4eInstance::new(h).expect("static instance"),
        status: Status::Yes,
        witness: Some(box_point(xi)),
        provenance,
        proof: None,
    }
}

fn no(
    name: &'static str,
    h: Polynomial,
    proof: NoProof,
    provenance: &'static str,
) -> LibraryInstance {
    LibraryInstance {
        name,
        bq4e: Bq4eInstance::new(h).expect("static instance"),
        status: Status::No,
        witness: None,
        provenance,
        proof: Some(proof),
    }
}

pub fn library() -> Vec<LibraryInstance> {
    vec![
        yes(
            "sq-minus-1",
            poly(1, &[(&[2], 1), (&[0], -1)]),
            &[1],
            "h(1) = 0",
        ),
        yes(
            "linear-sum",
            poly(2, &[(&[1, 0], 1), (&[0, 1], 1), (&[0, 0], -1)]),
            &[1, 0],
            "h(1, 0) = 0",
        ),
        yes(
            "quartic-pair",
            poly(2, &[(&[4, 0], 1), (&[0, 4], 1), (&[0, 0], -2)]),
            &[1, 1],
            "h(1, 1) = 0",
        ),
        yes(
            "quartic-drop",
            poly(1, &[(&[4], 1), (&[2], -1)]),
            &[0],
            "h(0) = 0",
        ),
        yes(
            "cubic-mixed",
            poly(
                2,
                &[(&[3, 0], 1), (&[1, 1], 1), (&[0, 2], -1), (&[0, 0], -1)],
            ),
            &[1, 1],
            "h(1, 1) = 0",
        ),
        no(
            "sq-plus-1",
            poly(1, &[(&[2], 1), (&[0], 1)]),
            NoProof::EvenPowerSum,
            "x^2 + 1 >= 1",
        ),
        no(
            "quartic-plus-2",
            poly(1, &[(&[4], 1), (&[0], 2)]),
            NoProof::EvenPowerSum,
            "x^4 + 2 >= 2",
        ),
        no(
            "shifted-square",
            poly(1, &[(&[4], 1), (&[2], -2), (&[0], 2)]),
            NoProof::SquarePlusConstant {
                g: poly(1, &[(&[2], 1), (&[0], -1)]),
                c: rat(1, 1),
            },
            "(x^2 - 1)^2 + 1 >= 1",
        ),
        no(
            "even-quartic",
            poly(1, &[(&[4], 1), (&[2], 1), (&[0], 1)]),
            NoProof::EvenPowerSum,
            "x^4 + x^2 + 1 >= 1",
        ),
        no(
            "skew-square",
            poly(1, &[(&[4], 1), (&[3], -2), (&[2], 1), (&[0], 1)]),
            NoProof::SquarePlusConstant {
                g: poly(1, &[(&[2], 1), (&[1], -1)]),
                c: rat(1, 1),
            },
            "(x^2 - x)^2 + 1 >= 1",
        ),
    ]
}

pub fn find(name: &str) -> Result<LibraryInstance> {
    library()
        .into_iter()
        .find(|i| i.name == name)
        .ok_or_else(|| HarnessError::UnknownInstance(name.into()))
}

/// Sphere-feasibility instances given directly as forms.
#[derive(Debug, Clone)]
pub struct HqsfLibraryInstance {
    pub name: &'static str,
    pub instance: HqsfInstance,
    pub status: Status,
    pub witness: Option<Vec<Rational>>,
    pub provenance: &'static str,
}

impl HqsfLibraryInstance {
    /// YES: the witness is nonzero and kills every form. NO: some form is
    /// definite, checked by exact elimination.
    pub fn check_provenance(&self) -> Result<()> {
        let fail = |why: &str| Err(HarnessError::Input(format!("{}: {why}", self.name)));
        match self.status {
            Status::Yes => {
                let Some(y) = &self.witness else {
                    return fail("yes without witness");
                };
                if y.iter().all(Zero::is_zero) {
                    return fail("zero witness");
                }
                for f in self.instance.forms() {
                    if !f.eval(y)?.is_zero() {
                        return fail("witness does not vanish");
                    }
                }
                Ok(())
            }
            Status::No => {
                if self.instance.forms().iter().any(is_definite) {
                    Ok(())
                } else {
                    fail("no definite form")
                }
            }
            Status::Unknown => Ok(()),
        }
    }
}

/// Positive or negative definiteness via the pivots of symmetric
/// elimination.
pub fn is_definite(q: &QuadraticForm) -> bool {
    let n = q.dimension();
    let mut a: Vec<Vec<Rational>> = q.rows().map(|r| r.to_vec()).collect();
    let mut sign = 0i8;
    for k in 0..n {
        let pivot = a[k][k].clone();
        let s = if pivot.is_positive() {
            1
        } else if pivot.is_negative() {
            -1
        } else {
            return false;
        };
        if sign != 0 && s != sign {
            return false;
        }
        sign = s;
        for i in k + 1..n {
            let f = &a[i][k] / &pivot;
            for j in k..n {
                let delta = &f * &a[k][j];
                a[i][j] -= delta;
            }
        }
    }
    true
}

fn diag(entries: &[i64]) -> QuadraticForm {
    QuadraticForm::diagonal(&entries.iter().map(|&x| rat(x, 1)).collect::<Vec<_>>())
}

pub fn hqsf_library() -> Vec<HqsfLibraryInstance> {
    let ones = |k: usize| Some(vec![Rational::one(); k]);
    vec![
        HqsfLibraryInstance {
            name: "diag-pm",
            instance: HqsfInstance::new(2, vec![diag(&[1, -1])]).expect("static"),
            status: Status::Yes,
            witness: ones(2),
            provenance: "q(1, 1) = 0",
        },
        HqsfLibraryInstance {
            name: "unit-line",
            instance: HqsfInstance::new(1, vec![diag(&[1])]).expect("static"),
            status: Status::No,
            witness: None,
            provenance: "z^2 is positive definite",
        },
        HqsfLibraryInstance {
            name: "cone-3",
            instance: HqsfInstance::new(3, vec![diag(&[1, 1, -2])]).expect("static"),
            status: Status::Yes,
            witness: ones(3),
            provenance: "q(1, 1, 1) = 0",
        },
        HqsfLibraryInstance {
            name: "pythagorean",
            instance: HqsfInstance::new(2, vec![diag(&[9, -16])]).expect("static"),
            status: Status::Yes,
            witness: Some(vec![rat(4, 1), rat(3, 1)]),
            provenance: "q(4, 3) = 0, and |(4, 3)| = 5 keeps lifted witnesses rational",
        },
        HqsfLibraryInstance {
            name: "identity-3",
            instance: HqsfInstance::new(3, vec![diag(&[1, 1, 1])]).expect("static"),
            status: Status::No,
            witness: None,
            provenance: "|z|^2 is positive definite",
        },
    ]
}

pub fn find_hqsf(name: &str) -> Result<HqsfLibraryInstance> {
    hqsf_library()
        .into_iter()
        .find(|i| i.name == name)
        .ok_or_else(|| HarnessError::UnknownInstance(name.into()))
}
