//! Bounded quartic feasibility to homogeneous quadratic sphere feasibility.
//!
//! The source instance asks whether `h` (degree at most 4) vanishes somewhere
//! in `[-1, 1]^n`. Compilation homogenizes `h` with a coordinate `x0`, encodes
//! the box with slacks `z_i^2 + s_i^2 = x0^2`, and lifts the quartic to
//! quadratics in products `u_ab ~ v_a v_b` of `v = (x0, z, s)`.
//!
//! Two systems are produced:
//!
//! * [`compile_homogeneous`]: every constraint is a genuine quadratic form in
//!   `y = (v, u, w)`. The products are tied by `u_ab x0 = v_a v_b`, the
//!   first row of `u` is pinned to `v` by squared linear ties, and the slack
//!   forms `u_00^2 = u_ab^2 + w_ab^2` rule out the `x0 = 0` branch. This is the
//!   system handed to the tensor stage.
//! * [`compile_affine`]: the textbook lifting `u_ab - v_a v_b = 0`,
//!   which has a linear part and therefore lives in affine mode.
//!
//! Constraint order is fixed: box, lift, tie, slack, quartic; each family in
//! index order.

use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::algebra::{
    rational_from_f64, rational_to_f64, Monomial, Polynomial, QuadraticForm, Rational,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bq4eInstance {
    n: usize,
    h: Polynomial,
}

impl Bq4eInstance {
    pub fn new(h: Polynomial) -> Result<Self> {
        if h.total_degree() > 4 {
            return Err(Error::input(alloc::format!(
                "degree {} exceeds 4",
                h.total_degree()
            )));
        }
        if h.variable_count() == 0 {
            return Err(Error::input("instance needs at least one variable"));
        }
        Ok(Bq4eInstance {
            n: h.variable_count(),
            h,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> &Polynomial {
        &self.h
    }
}

/// A point of the box `[-1, 1]^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxWitness {
    xi: Vec<Rational>,
}

impl BoxWitness {
    pub fn new(xi: Vec<Rational>) -> Result<Self> {
        let one = Rational::one();
        if let Some(i) = xi.iter().position(|x| x.abs() > one) {
            return Err(Error::input(alloc::format!(
                "coordinate {i} outside [-1, 1]"
            )));
        }
        Ok(BoxWitness { xi })
    }

    pub fn coords(&self) -> &[Rational] {
        &self.xi
    }
}

/// An exact, unnormalized point of a homogeneous system's zero set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SphereWitness {
    y: Vec<Rational>,
    normalized: bool,
}

impl SphereWitness {
    pub fn new(y: Vec<Rational>) -> Result<Self> {
        if y.iter().all(Zero::is_zero) {
            return Err(Error::input("sphere witness must be nonzero"));
        }
        Ok(SphereWitness {
            y,
            normalized: false,
        })
    }

    pub fn coords(&self) -> &[Rational] {
        &self.y
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn scaled(&self, c: &Rational) -> Result<SphereWitness> {
        if c.is_zero() {
            return Err(Error::input("cannot scale a witness by zero"));
        }
        Ok(SphereWitness {
            y: self.y.iter().map(|v| v * c).collect(),
            normalized: false,
        })
    }

    /// Unit vector in double precision.
    pub fn to_unit_f64(&self) -> Vec<f64> {
        let y: Vec<f64> = self.y.iter().map(rational_to_f64).collect();
        let norm = libm::sqrt(y.iter().map(|v| v * v).sum::<f64>());
        y.into_iter().map(|v| v / norm).collect()
    }
}

/// Double-precision forward witness for box points whose slacks are
/// irrational. Not a certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatWitness {
    pub y: Vec<f64>,
    /// Largest `|constraint value|` at `y` (unit-normalized).
    pub max_residual: f64,
}

/// Index bookkeeping for `y = (v, u[, w])` with `v = (x0, z_1..z_n, s_1..s_n)`
/// and one `u` (and `w`) coordinate per unordered pair `a <= b` of
/// `v`-indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarLayout {
    n: usize,
    slacks: bool,
}

impl VarLayout {
    pub fn homogeneous(n: usize) -> Self {
        VarLayout { n, slacks: true }
    }

    pub fn affine(n: usize) -> Self {
        VarLayout { n, slacks: false }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_slacks(&self) -> bool {
        self.slacks
    }

    pub fn x0(&self) -> usize {
        0
    }

    pub fn z(&self, i: usize) -> usize {
        1 + i
    }

    pub fn s(&self, i: usize) -> usize {
        1 + self.n + i
    }

    pub fn v_len(&self) -> usize {
        2 * self.n + 1
    }

    pub fn pair_count(&self) -> usize {
        let m = self.v_len();
        m * (m + 1) / 2
    }

    /// Position of the sorted pair in lexicographic order.
    pub fn pair_index(&self, a: usize, b: usize) -> usize {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let m = self.v_len();
        debug_assert!(b < m);
        a * m - a * a.saturating_sub(1) / 2 + (b - a)
    }

    pub fn u(&self, a: usize, b: usize) -> usize {
        self.v_len() + self.pair_index(a, b)
    }

    pub fn w(&self, a: usize, b: usize) -> usize {
        assert!(self.slacks, "affine layout has no w coordinates");
        self.v_len() + self.pair_count() + self.pair_index(a, b)
    }

    /// Sorted pairs `(a, b)`, `a <= b`, in layout order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let m = self.v_len();
        (0..m).flat_map(move |a| (a..m).map(move |b| (a, b)))
    }

    pub fn dimension(&self) -> usize {
        let p = self.pair_count();
        self.v_len() + if self.slacks { 2 * p } else { p }
    }

    /// Number of emitted constraints.
    pub fn constraint_count(&self) -> usize {
        let p = self.pair_count();
        if self.slacks {
            self.n + p + self.v_len() + p + 1
        } else {
            self.n + p + 1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemMode {
    Homogeneous,
    Affine,
}

/// Which family a constraint belongs to, with its indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `z_i^2 + s_i^2 - x0^2`
    Box(usize),
    /// `u_ab x0 - v_a v_b` (homogeneous) or `u_ab - v_a v_b` (affine)
    Lift(usize, usize),
    /// `(u_0a - v_a)^2`
    Tie(usize),
    /// `u_00^2 - u_ab^2 - w_ab^2`
    Slack(usize, usize),
    /// The lifted quartic `H~(u)`
    Quartic,
    /// Constraint supplied directly, not produced by compilation.
    Given,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffinePart {
    pub linear: Vec<Rational>,
    pub constant: Rational,
}

/// `y^T Q y (+ l^T y + c)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub form: QuadraticForm,
    pub affine: Option<AffinePart>,
}

impl Constraint {
    pub fn eval(&self, y: &[Rational]) -> Result<Rational> {
        let mut value = self.form.eval(y)?;
        if let Some(a) = &self.affine {
            for (l, v) in a.linear.iter().zip(y) {
                if !l.is_zero() {
                    value += l * v;
                }
            }
            value += &a.constant;
        }
        Ok(value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticSystem {
    dimension: usize,
    mode: SystemMode,
    constraints: Vec<Constraint>,
}

impl QuadraticSystem {
    pub fn new(dimension: usize, mode: SystemMode, constraints: Vec<Constraint>) -> Result<Self> {
        for (k, c) in constraints.iter().enumerate() {
            if c.form.dimension() != dimension {
                return Err(Error::input(alloc::format!(
                    "constraint {k} has dimension {}",
                    c.form.dimension()
                )));
            }
            match (mode, &c.affine) {
                (SystemMode::Homogeneous, Some(_)) => {
                    return Err(Error::input(alloc::format!(
                        "constraint {k} is affine in a homogeneous system"
                    )))
                }
                (_, Some(a)) => Error::check_dim(dimension, a.linear.len())?,
                _ => {}
            }
        }
        Ok(QuadraticSystem {
            dimension,
            mode,
            constraints,
        })
    }

    /// A homogeneous system from bare forms.
    pub fn from_forms(dimension: usize, forms: Vec<QuadraticForm>) -> Result<Self> {
        let constraints = forms
            .into_iter()
            .map(|form| Constraint {
                kind: ConstraintKind::Given,
                form,
                affine: None,
            })
            .collect();
        QuadraticSystem::new(dimension, SystemMode::Homogeneous, constraints)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn mode(&self) -> SystemMode {
        self.mode
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn forms(&self) -> impl Iterator<Item = &QuadraticForm> {
        self.constraints.iter().map(|c| &c.form)
    }

    pub fn residuals(&self, y: &[Rational]) -> Result<Vec<Rational>> {
        self.constraints.iter().map(|c| c.eval(y)).collect()
    }

    /// Index of the first constraint not vanishing at `y`.
    pub fn first_violation(&self, y: &[Rational]) -> Result<Option<usize>> {
        Error::check_dim(self.dimension, y.len())?;
        for (k, c) in self.constraints.iter().enumerate() {
            if !c.eval(y)?.is_zero() {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }
}

/// `H(x0, z) = x0^4 h(z / x0)`, homogeneous of degree 4 in `n + 1` variables
/// with `x0` first.
pub fn homogenize(inst: &Bq4eInstance) -> Polynomial {
    let mut out = Polynomial::zero(inst.n + 1);
    for (m, c) in inst.h.terms() {
        let shifted = m.remap(|v| v + 1);
        let pad = 4 - m.degree();
        let full = if pad > 0 {
            shifted.mul(&Monomial::from_indices(&alloc::vec![0; pad as usize]))
        } else {
            shifted
        };
        out.add_term(full, c.clone());
    }
    out
}

fn unit(dimension: usize, idx: usize) -> Vec<Rational> {
    let mut e = alloc::vec![Rational::zero(); dimension];
    e[idx] = Rational::one();
    e
}

/// `H~(u)`: each quartic monomial `v_a v_b v_c v_d` (indices sorted) becomes
/// `u_ab u_cd`. `H` variables coincide with the first `n + 1` `v`-indices.
fn lifted_quartic(h_form: &Polynomial, layout: &VarLayout) -> QuadraticForm {
    let mut q = QuadraticForm::zeros(layout.dimension());
    for (m, c) in h_form.terms() {
        let idx = m.indices();
        q.add_monomial(layout.u(idx[0], idx[1]), layout.u(idx[2], idx[3]), c);
    }
    q
}

fn box_constraints(layout: &VarLayout) -> Vec<Constraint> {
    let dim = layout.dimension();
    let one = Rational::one();
    (0..layout.n())
        .map(|i| {
            let mut q = QuadraticForm::zeros(dim);
            q.add_monomial(layout.z(i), layout.z(i), &one);
            q.add_monomial(layout.s(i), layout.s(i), &one);
            q.add_monomial(layout.x0(), layout.x0(), &-&one);
            Constraint {
                kind: ConstraintKind::Box(i),
                form: q,
                affine: None,
            }
        })
        .collect()
}

pub fn compile_homogeneous(inst: &Bq4eInstance) -> (QuadraticSystem, VarLayout) {
    let layout = VarLayout::homogeneous(inst.n);
    let dim = layout.dimension();
    let one = Rational::one();
    let mut constraints = box_constraints(&layout);

    for (a, b) in layout.pairs() {
        let mut q = QuadraticForm::zeros(dim);
        q.add_monomial(layout.u(a, b), layout.x0(), &one);
        q.add_monomial(a, b, &-&one);
        constraints.push(Constraint {
            kind: ConstraintKind::Lift(a, b),
            form: q,
            affine: None,
        });
    }

    for a in 0..layout.v_len() {
        let mut ell = unit(dim, layout.u(0, a));
        ell[a] -= &one;
        let q = QuadraticForm::rank_one(&ell).expect("tie vector is nonzero");
        constraints.push(Constraint {
            kind: ConstraintKind::Tie(a),
            form: q,
            affine: None,
        });
    }

    for (a, b) in layout.pairs() {
        let mut q = QuadraticForm::zeros(dim);
        q.add_monomial(layout.u(0, 0), layout.u(0, 0), &one);
        q.add_monomial(layout.u(a, b), layout.u(a, b), &-&one);
        q.add_monomial(layout.w(a, b), layout.w(a, b), &-&one);
        constraints.push(Constraint {
            kind: ConstraintKind::Slack(a, b),
            form: q,
            affine: None,
        });
    }

    let h_form = homogenize(inst);
    constraints.push(Constraint {
        kind: ConstraintKind::Quartic,
        form: lifted_quartic(&h_form, &layout),
        affine: None,
    });

    let sys = QuadraticSystem::new(dim, SystemMode::Homogeneous, constraints)
        .expect("compiled constraints match the layout");
    debug_assert_eq!(sys.len(), layout.constraint_count());
    (sys, layout)
}

/// The lifting exactly as `u_ab - v_a v_b = 0`, in affine mode over `(v, u)`.
pub fn compile_affine(inst: &Bq4eInstance) -> (QuadraticSystem, VarLayout) {
    let layout = VarLayout::affine(inst.n);
    let dim = layout.dimension();
    let mut constraints = box_constraints(&layout);
    for (a, b) in layout.pairs() {
        let mut q = QuadraticForm::zeros(dim);
        q.add_monomial(a, b, &-Rational::one());
        constraints.push(Constraint {
            kind: ConstraintKind::Lift(a, b),
            form: q,
            affine: Some(AffinePart {
                linear: unit(dim, layout.u(a, b)),
                constant: Rational::zero(),
            }),
        });
    }
    let h_form = homogenize(inst);
    constraints.push(Constraint {
        kind: ConstraintKind::Quartic,
        form: lifted_quartic(&h_form, &layout),
        affine: None,
    });
    let sys = QuadraticSystem::new(dim, SystemMode::Affine, constraints)
        .expect("compiled constraints match the layout");
    (sys, layout)
}

/// Rational square root, if there is one.
pub fn rational_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

fn check_root(inst: &Bq4eInstance, xi: &BoxWitness) -> Result<()> {
    Error::check_dim(inst.n, xi.coords().len())?;
    let value = inst.h.eval(xi.coords())?;
    if !value.is_zero() {
        return Err(Error::Precondition(alloc::format!(
            "h(xi) = {} is not zero",
            crate::algebra::format_rational(&value)
        )));
    }
    Ok(())
}

/// `v = (1, xi, s)` with `s_i^2 = 1 - xi_i^2`, as exact rationals if possible.
fn lifted_v(xi: &BoxWitness) -> core::result::Result<Vec<Rational>, usize> {
    let one = Rational::one();
    let mut v = alloc::vec![one.clone()];
    v.extend(xi.coords().iter().cloned());
    for (i, x) in xi.coords().iter().enumerate() {
        v.push(rational_sqrt(&(&one - x * x)).ok_or(i)?);
    }
    Ok(v)
}

/// Pushes a box root forward: `x0 = 1`, `z = xi`, `s_i = sqrt(1 - xi_i^2)`,
/// `u_ab = v_a v_b`, `w_ab = sqrt(1 - u_ab^2)`.
///
/// Fails with [`Error::Inexact`] when a slack is irrational; see
/// [`witness_forward_f64`] for that case.
pub fn witness_forward(inst: &Bq4eInstance, xi: &BoxWitness) -> Result<SphereWitness> {
    check_root(inst, xi)?;
    let layout = VarLayout::homogeneous(inst.n);
    let v = lifted_v(xi).map_err(|i| {
        Error::Inexact(alloc::format!(
            "slack s_{i} = sqrt(1 - xi_{i}^2) is irrational"
        ))
    })?;
    let one = Rational::one();
    let mut y = alloc::vec![Rational::zero(); layout.dimension()];
    y[..v.len()].clone_from_slice(&v);
    for (a, b) in layout.pairs() {
        let u = &v[a] * &v[b];
        let w = rational_sqrt(&(&one - &u * &u)).ok_or_else(|| {
            Error::Inexact(alloc::format!(
                "slack w_({a},{b}) = sqrt(1 - u_ab^2) is irrational"
            ))
        })?;
        y[layout.u(a, b)] = u;
        y[layout.w(a, b)] = w;
    }
    SphereWitness::new(y)
}

/// Double-precision forward witness on the unit sphere, with the residual
/// measured against `sys`.
pub fn witness_forward_f64(
    inst: &Bq4eInstance,
    sys: &QuadraticSystem,
    xi: &BoxWitness,
) -> Result<FloatWitness> {
    check_root(inst, xi)?;
    let layout = VarLayout::homogeneous(inst.n);
    Error::check_dim(layout.dimension(), sys.dimension())?;
    let mut v = alloc::vec![1.0];
    v.extend(xi.coords().iter().map(rational_to_f64));
    for i in 0..inst.n {
        let x = v[1 + i];
        v.push(libm::sqrt((1.0 - x * x).max(0.0)));
    }
    let mut y = alloc::vec![0.0; layout.dimension()];
    y[..v.len()].copy_from_slice(&v);
    for (a, b) in layout.pairs() {
        let u = v[a] * v[b];
        y[layout.u(a, b)] = u;
        y[layout.w(a, b)] = libm::sqrt((1.0 - u * u).max(0.0));
    }
    let norm = libm::sqrt(y.iter().map(|t| t * t).sum::<f64>());
    for t in &mut y {
        *t /= norm;
    }
    let mut max_residual = 0.0f64;
    for c in sys.constraints() {
        let mut r = 0.0;
        for (i, j, q) in c.form.nonzeros() {
            r += rational_to_f64(q) * y[i] * y[j];
        }
        max_residual = max_residual.max(libm::fabs(r));
    }
    Ok(FloatWitness { y, max_residual })
}

/// Forward point of the affine system: `v = (1, xi, s)`, `u = v v^T`. It
/// satisfies every affine constraint exactly but is not on the sphere; the
/// anisotropic scaling `v -> t v`, `u -> t^2 u` that normalizes it keeps all
/// constraints at zero (see [`normalize_affine_f64`]).
pub fn witness_forward_affine(inst: &Bq4eInstance, xi: &BoxWitness) -> Result<Vec<Rational>> {
    check_root(inst, xi)?;
    let layout = VarLayout::affine(inst.n);
    let v =
        lifted_v(xi).map_err(|i| Error::Inexact(alloc::format!("slack s_{i} is irrational")))?;
    let mut y = alloc::vec![Rational::zero(); layout.dimension()];
    y[..v.len()].clone_from_slice(&v);
    for (a, b) in layout.pairs() {
        y[layout.u(a, b)] = &v[a] * &v[b];
    }
    Ok(y)
}

/// Rescales an affine-system point by `v -> t v`, `u -> t^2 u` onto the unit
/// sphere.
pub fn normalize_affine_f64(layout: &VarLayout, y: &[Rational]) -> Vec<f64> {
    let y: Vec<f64> = y.iter().map(rational_to_f64).collect();
    let m = layout.v_len();
    let v_sq: f64 = y[..m].iter().map(|t| t * t).sum();
    let u_sq: f64 = y[m..].iter().map(|t| t * t).sum();
    // t^2 v_sq + t^4 u_sq = 1, solved for s = t^2.
    let s = if u_sq == 0.0 {
        1.0 / v_sq
    } else {
        (-v_sq + libm::sqrt(v_sq * v_sq + 4.0 * u_sq)) / (2.0 * u_sq)
    };
    let t = libm::sqrt(s);
    y.iter()
        .enumerate()
        .map(|(k, val)| if k < m { val * t } else { val * s })
        .collect()
}

/// Pulls an exact zero of the homogeneous system back to a box root,
/// `xi_i = z_i / x0`.
pub fn witness_backward(
    inst: &Bq4eInstance,
    sys: &QuadraticSystem,
    layout: &VarLayout,
    y: &SphereWitness,
) -> Result<BoxWitness> {
    if sys.mode() != SystemMode::Homogeneous || !layout.has_slacks() {
        return Err(Error::input("backward map needs the homogeneous system"));
    }
    Error::check_dim(layout.dimension(), sys.dimension())?;
    Error::check_dim(sys.dimension(), y.coords().len())?;
    if let Some(k) = sys.first_violation(y.coords())? {
        return Err(Error::Precondition(alloc::format!(
            "constraint {k} ({:?}) does not vanish",
            sys.constraints()[k].kind
        )));
    }
    let y = y.coords();
    let x0 = &y[layout.x0()];
    if x0.is_zero() {
        return Err(Error::Invariant(
            "nonzero zero of the homogeneous system with x0 = 0".into(),
        ));
    }
    let xi: Vec<Rational> = (0..layout.n()).map(|i| &y[layout.z(i)] / x0).collect();
    let xi = BoxWitness::new(xi)
        .map_err(|_| Error::Invariant("backward witness left the box".into()))?;
    if !inst.h().eval(xi.coords())?.is_zero() {
        return Err(Error::Invariant(
            "backward witness is not a root of h".into(),
        ));
    }
    Ok(xi)
}

/// Float copy of a rational vector; convenience for numerics.
pub fn to_f64_vec(y: &[Rational]) -> Vec<f64> {
    y.iter().map(rational_to_f64).collect()
}

/// Exact copy of a float vector.
pub fn from_f64_vec(y: &[f64]) -> Result<Vec<Rational>> {
    y.iter().map(|&v| rational_from_f64(v)).collect()
}
