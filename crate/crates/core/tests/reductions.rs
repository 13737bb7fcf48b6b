mod common;

use common::*;
use proptest::prelude::*;
use spectral_threshold_core::algebra::rat;
use spectral_threshold_core::reduce_box::{
    compile_affine, compile_homogeneous, homogenize, witness_backward, witness_forward,
    witness_forward_affine, BoxWitness, Bq4eInstance, ConstraintKind, SphereWitness, SystemMode,
    VarLayout,
};
use spectral_threshold_core::{Error, Polynomial, Rational};

fn unit_box_point() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(
        prop_oneof![Just(rat(-1, 1)), Just(rat(0, 1)), Just(rat(1, 1))],
        1..=2,
    )
}

/// `g - g(xi)` vanishes at `xi`, so it is a YES instance with a known root.
fn instance_with_root() -> impl Strategy<Value = (Bq4eInstance, BoxWitness)> {
    unit_box_point().prop_flat_map(|xi| {
        let n = xi.len();
        (polynomial(n, 4), Just(xi)).prop_map(move |(g, xi)| {
            let shift = Polynomial::constant(n, g.eval(&xi).unwrap());
            let mut h = &g - &shift;
            if h.is_zero() {
                h = &Polynomial::var(n, 0) - &Polynomial::constant(n, xi[0].clone());
            }
            (Bq4eInstance::new(h).unwrap(), BoxWitness::new(xi).unwrap())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn homogenization_identity(g in polynomial(2, 4), z in vector(2), t in nonzero_rational()) {
        prop_assume!(!g.is_zero());
        let inst = Bq4eInstance::new(g.clone()).unwrap();
        let big_h = homogenize(&inst);
        prop_assert!(big_h.is_homogeneous(4));
        let mut point = vec![rat(1, 1)];
        point.extend(z.iter().cloned());
        prop_assert_eq!(big_h.eval(&point).unwrap(), g.eval(&z).unwrap());
        // H(t, t z) = t^4 h(z)
        let scaled: Vec<_> = point.iter().map(|x| x * &t).collect();
        let t2 = &t * &t;
        prop_assert_eq!(big_h.eval(&scaled).unwrap(), g.eval(&z).unwrap() * &t2 * &t2);
    }

    #[test]
    fn forward_then_backward_is_identity((inst, xi) in instance_with_root(), c in nonzero_rational()) {
        let (sys, layout) = compile_homogeneous(&inst);
        let y = witness_forward(&inst, &xi).unwrap();
        prop_assert!(sys.residuals(y.coords()).unwrap().iter().all(|r| *r == rat(0, 1)));
        prop_assert_eq!(witness_backward(&inst, &sys, &layout, &y).unwrap(), xi.clone());
        // Homogeneous: any nonzero multiple is still a zero and maps back to xi.
        let scaled = y.scaled(&c).unwrap();
        prop_assert!(sys.residuals(scaled.coords()).unwrap().iter().all(|r| *r == rat(0, 1)));
        prop_assert_eq!(witness_backward(&inst, &sys, &layout, &scaled).unwrap(), xi);
    }

    #[test]
    fn forms_scale_quadratically((inst, _) in instance_with_root(), c in rational(), seed in 0u64..1000) {
        let (sys, layout) = compile_homogeneous(&inst);
        let y: Vec<_> = (0..layout.dimension()).map(|i| rat(((i as u64 * 7 + seed) % 11) as i64 - 5, 3)).collect();
        let scaled: Vec<_> = y.iter().map(|x| x * &c).collect();
        let c2 = &c * &c;
        for (a, b) in sys.residuals(&y).unwrap().iter().zip(sys.residuals(&scaled).unwrap()) {
            prop_assert_eq!(a * &c2, b);
        }
    }

    #[test]
    fn affine_forward_point_satisfies_affine_system((inst, xi) in instance_with_root()) {
        let (sys, _) = compile_affine(&inst);
        let y = witness_forward_affine(&inst, &xi).unwrap();
        prop_assert!(sys.residuals(&y).unwrap().iter().all(|r| *r == rat(0, 1)));
    }
}

#[test]
fn backward_rejects_non_zeros() {
    let inst =
        Bq4eInstance::new(&Polynomial::var(1, 0).pow(2) - &Polynomial::constant(1, rat(1, 1)))
            .unwrap();
    let (sys, layout) = compile_homogeneous(&inst);
    let mut y = vec![rat(0, 1); layout.dimension()];
    y[0] = rat(1, 1);
    let w = SphereWitness::new(y).unwrap();
    assert!(matches!(
        witness_backward(&inst, &sys, &layout, &w),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn forward_needs_rational_slacks() {
    // xi = 1/2 makes s = sqrt(3)/2.
    let inst = Bq4eInstance::new(
        &Polynomial::var(1, 0).scale(&rat(2, 1)) - &Polynomial::constant(1, rat(1, 1)),
    )
    .unwrap();
    let xi = BoxWitness::new(vec![rat(1, 2)]).unwrap();
    assert!(matches!(
        witness_forward(&inst, &xi),
        Err(Error::Inexact(_))
    ));
}

#[test]
fn size_formulas() {
    for n in 1..=5usize {
        let pairs = (2 * n + 1) * (n + 1);
        let inst = Bq4eInstance::new(Polynomial::var(n, 0)).unwrap();
        let (sys, layout) = compile_homogeneous(&inst);
        assert_eq!(sys.dimension(), (2 * n + 1) * (2 * n + 3));
        assert_eq!(layout.dimension(), sys.dimension());
        assert_eq!(sys.len(), n + 2 * pairs + (2 * n + 1) + 1);
        assert_eq!(layout.constraint_count(), sys.len());
        assert_eq!(layout.pair_count(), pairs);

        let (aff, alay) = compile_affine(&inst);
        assert_eq!(aff.mode(), SystemMode::Affine);
        assert_eq!(aff.dimension(), 2 * n + 1 + pairs);
        assert_eq!(aff.len(), n + pairs + 1);
        assert_eq!(alay.constraint_count(), aff.len());
    }
    assert_eq!(VarLayout::homogeneous(1).dimension(), 15);
    assert_eq!(
        compile_homogeneous(&Bq4eInstance::new(Polynomial::var(1, 0)).unwrap())
            .0
            .len(),
        17
    );
}

#[test]
fn pair_indices_enumerate_the_u_block() {
    for n in 1..=4 {
        let layout = VarLayout::homogeneous(n);
        let idx: Vec<_> = layout
            .pairs()
            .map(|(a, b)| layout.pair_index(a, b))
            .collect();
        assert_eq!(idx, (0..layout.pair_count()).collect::<Vec<_>>());
        for (a, b) in layout.pairs() {
            assert_eq!(layout.pair_index(b, a), layout.pair_index(a, b));
        }
    }
}

/// Substitutes zero for the listed variables.
fn restrict(p: &Polynomial, zero: &[usize]) -> Polynomial {
    let mut out = Polynomial::zero(p.variable_count());
    for (m, c) in p.terms() {
        if m.factors().iter().all(|(v, _)| !zero.contains(v)) {
            out.add_term(m.clone(), c.clone());
        }
    }
    out
}

fn square(var: usize, n: usize) -> Polynomial {
    Polynomial::var(n, var).pow(2)
}

/// On `x0 = 0` the box forms sum to a positive definite form in `(z, s)`,
/// forcing `v = 0`; the ties then read `u_0a^2`, forcing `u_00 = 0`; the
/// slack forms then read `-(u_ab^2 + w_ab^2)`. So the only zero is `y = 0`.
#[test]
fn x0_slice_has_only_the_trivial_zero() {
    for n in 1..=3 {
        let inst = Bq4eInstance::new(Polynomial::var(n, 0)).unwrap();
        let (sys, layout) = compile_homogeneous(&inst);
        let dim = layout.dimension();
        let x0 = [layout.x0()];
        let v_block: Vec<usize> = (0..layout.v_len()).collect();
        let mut box_sum = Polynomial::zero(dim);
        let mut expected_box = Polynomial::zero(dim);
        for c in sys.constraints() {
            let p = c.form.to_polynomial();
            match c.kind {
                ConstraintKind::Box(i) => {
                    box_sum = &box_sum + &restrict(&p, &x0);
                    expected_box =
                        &expected_box + &(&square(layout.z(i), dim) + &square(layout.s(i), dim));
                }
                ConstraintKind::Tie(a) => {
                    assert_eq!(restrict(&p, &v_block), square(layout.u(0, a), dim));
                }
                ConstraintKind::Slack(a, b) => {
                    let r = restrict(&p, &[layout.u(0, 0)]);
                    let expected = if (a, b) == (0, 0) {
                        -&square(layout.w(0, 0), dim)
                    } else {
                        -&(&square(layout.u(a, b), dim) + &square(layout.w(a, b), dim))
                    };
                    assert_eq!(r, expected);
                }
                _ => {}
            }
        }
        assert_eq!(box_sum, expected_box);
        // Every variable of the layout is covered by one of the three steps.
        let covered = layout.v_len() + 2 * layout.pair_count();
        assert_eq!(covered, dim);
    }
}
