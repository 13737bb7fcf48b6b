mod common;

use common::*;
use proptest::prelude::*;
use spectral_threshold_core::algebra::rat;
use spectral_threshold_core::reduce_tensor::{
    build_quartic, certify_max, lift_order, tensorize, threshold_compare, HqsfInstance, Verdict,
};
use spectral_threshold_core::symtensor::gamma_sq;
use spectral_threshold_core::{QuadraticForm, Rational};

fn instance() -> impl Strategy<Value = HqsfInstance> {
    (1usize..=3).prop_flat_map(|n| {
        prop::collection::vec(symmetric_form(n), 1..=3)
            .prop_filter("some nonzero form", |fs| fs.iter().any(|f| !f.is_zero()))
            .prop_map(move |forms| HqsfInstance::new(n, forms).unwrap())
    })
}

fn with_point() -> impl Strategy<Value = (HqsfInstance, Vec<Rational>)> {
    instance().prop_flat_map(|inst| {
        let n = inst.dimension();
        (Just(inst), nonzero_vector(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sandwich((inst, z) in with_point()) {
        let data = build_quartic(&inst).unwrap();
        let n2 = norm_sq(&z);
        let n4 = &n2 * &n2;
        let p = data.p().eval(&z).unwrap();
        prop_assert!(n4 <= p);
        prop_assert!(p <= data.b() * &n4);
        prop_assert_eq!(data.b().clone(), data.c() + rat(1, 1));
    }

    #[test]
    fn equality_exactly_at_common_zeros((inst, z) in with_point()) {
        let data = build_quartic(&inst).unwrap();
        let all_zero = inst.forms().iter().all(|f| f.eval(&z).unwrap() == rat(0, 1));
        prop_assert_eq!(certify_max(&data, &z).unwrap(), all_zero);
    }

    #[test]
    fn tensor_reproduces_the_quartic((inst, z) in with_point()) {
        let data = build_quartic(&inst).unwrap();
        let t = tensorize(&data);
        prop_assert_eq!(t.tensor().eval_form(&z).unwrap(), data.p().eval(&z).unwrap());
        prop_assert_eq!(&t.tensor().to_form(), data.p());
        prop_assert_eq!(t.threshold_base(), data.b());
    }

    #[test]
    fn order_lift_factors((inst, z) in with_point(), t in prop::collection::vec(rational(), 2)) {
        let data = build_quartic(&inst).unwrap();
        let lift = lift_order(&data, 6).unwrap();
        let mut point = z.clone();
        point.extend(t.iter().cloned());
        prop_assert_eq!(lift.p_d.eval(&point).unwrap(), data.p().eval(&z).unwrap() * &t[0] * &t[1]);
        prop_assert_eq!(lift.gamma_sq.clone(), gamma_sq(6));
        prop_assert!(lift.p_d.is_homogeneous(6));
    }
}

fn diag_pm() -> HqsfInstance {
    HqsfInstance::new(2, vec![QuadraticForm::diagonal(&[rat(1, 1), rat(-1, 1)])]).unwrap()
}

#[test]
fn quartic_of_diag_pm() {
    let data = build_quartic(&diag_pm()).unwrap();
    assert_eq!(data.b(), &rat(3, 1));
    assert!(certify_max(&data, &[rat(1, 1), rat(1, 1)]).unwrap());
    assert!(certify_max(&data, &[rat(7, 1), rat(-7, 1)]).unwrap());
    assert!(!certify_max(&data, &[rat(1, 1), rat(0, 1)]).unwrap());
    assert!(certify_max(&data, &[rat(0, 1), rat(0, 1)]).is_err());
}

#[test]
fn threshold_comparison_semantics() {
    let data = build_quartic(&diag_pm()).unwrap();
    let t = tensorize(&data);
    let w = [rat(1, 1), rat(1, 1)];
    assert_eq!(
        threshold_compare(&t, 0.0, Some(&w), 1e-6).unwrap().verdict,
        Verdict::CertifiedYes
    );
    assert_eq!(
        threshold_compare(&t, 3.0 - 1e-9, None, 1e-6)
            .unwrap()
            .verdict,
        Verdict::NumericallyAbove
    );
    assert_eq!(
        threshold_compare(&t, 2.9, None, 1e-6).unwrap().verdict,
        Verdict::NumericallyBelow
    );
    assert!(threshold_compare(&t, 2.9, None, 1.5).is_err());
}

/// Along `(y, t, t)` with `t = |y|/2` the order-6 lift reaches `B * gamma_6`
/// exactly when `y` is a common zero.
#[test]
fn lifted_witness_certifies_at_order_six() {
    let inst =
        HqsfInstance::new(2, vec![QuadraticForm::diagonal(&[rat(9, 1), rat(-16, 1)])]).unwrap();
    let data = build_quartic(&inst).unwrap();
    let lift = lift_order(&data, 6).unwrap();
    let ti = lift.threshold_instance().unwrap();
    let y = [rat(4, 1), rat(3, 1), rat(5, 2), rat(5, 2)];
    assert!(ti.certifies(&y).unwrap());
    let off = [rat(4, 1), rat(3, 1), rat(2, 1), rat(3, 1)];
    assert!(!ti.certifies(&off).unwrap());
    assert!(lift_order(&data, 3).is_err());
}
