use spectral_threshold::format::{Document, SystemDoc, WitnessDoc};
use spectral_threshold::library::{find, find_hqsf, hqsf_library, library, Status};
use spectral_threshold::pipeline::{
    run_bq4e, run_hqsf, run_hqsf_pipeline, run_pipeline, verify_witness, PipelineConfig,
    ReportVerdict, VerifyOutcome,
};
use spectral_threshold_core::algebra::rat;
use spectral_threshold_core::numopt::{residual_min, AscentConfig};
use spectral_threshold_core::reduce_box::{compile_affine, compile_homogeneous};
use spectral_threshold_core::reduce_tensor::{build_quartic, certify_max, HqsfInstance};

fn cfg(restarts: usize) -> PipelineConfig {
    PipelineConfig {
        ascent: AscentConfig::default().with_restarts(restarts).with_seed(5),
        ..PipelineConfig::default()
    }
}

#[test]
fn sq_minus_1_certifies_with_fifteen_coordinates() {
    let r = run_pipeline(&find("sq-minus-1").unwrap(), &cfg(4)).unwrap();
    assert_eq!(r.verdict, ReportVerdict::CertifiedYes);
    assert_eq!(r.label, "exact");
    assert_eq!(r.exact_witness.as_ref().unwrap().len(), 15);
    assert_eq!(r.dimension, 15);
    let names: Vec<_> = r.stages.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "reduce-box",
            "forward-witness",
            "reduce-tensor",
            "tensorize",
            "certify"
        ]
    );
}

#[test]
fn sq_plus_1_is_numerically_below() {
    let r = run_pipeline(&find("sq-plus-1").unwrap(), &cfg(16)).unwrap();
    assert_eq!(r.verdict, ReportVerdict::NumericallyBelow);
    assert_eq!(r.label, "numerical");
    assert!(r.exact_witness.is_none());
    // The 200-restart margin is a lower bound for any fewer-restart run.
    assert!(r.margins.max_margin.unwrap() >= 7.2757e-3);
    let res = r.margins.residual_min.unwrap();
    assert!(
        (res - r.margins.max_margin.unwrap()).abs() < 1e-6,
        "B - max p and min residual measure the same gap"
    );
}

#[test]
fn every_yes_instance_certifies_and_reports_hold_their_invariant() {
    for inst in library().into_iter().filter(|i| i.status == Status::Yes) {
        let r = run_pipeline(&inst, &cfg(2)).unwrap();
        assert_eq!(r.verdict, ReportVerdict::CertifiedYes, "{}", inst.name);
        let (sys, _) = compile_homogeneous(&inst.bq4e);
        let data = build_quartic(&HqsfInstance::from_system(&sys).unwrap()).unwrap();
        assert!(certify_max(&data, &r.exact_witness_values().unwrap().unwrap()).unwrap());
    }
    for inst in hqsf_library()
        .into_iter()
        .filter(|i| i.status == Status::Yes)
    {
        let r = run_hqsf_pipeline(&inst, &cfg(2)).unwrap();
        assert_eq!(r.verdict, ReportVerdict::CertifiedYes, "{}", inst.name);
    }
}

#[test]
fn diag_pm_certifies_with_its_witness() {
    let r = run_hqsf_pipeline(&find_hqsf("diag-pm").unwrap(), &cfg(2)).unwrap();
    assert_eq!(r.verdict, ReportVerdict::CertifiedYes);
    assert_eq!(
        r.exact_witness,
        Some(vec!["1".to_string(), "1".to_string()])
    );
}

#[test]
fn witnessless_runs_certify_only_isolated_rational_zeros() {
    let inst = find_hqsf("diag-pm").unwrap();
    let r = run_hqsf("diag-pm", &inst.instance, None, &cfg(8)).unwrap();
    assert_eq!(r.verdict, ReportVerdict::CertifiedYes);
    // The zeros of z1^2 + z2^2 - 2 z3^2 form a circle; a float point on it is
    // almost never rational, so without a witness the verdict stays numerical.
    let inst = find_hqsf("cone-3").unwrap();
    let r = run_hqsf("cone-3", &inst.instance, None, &cfg(8)).unwrap();
    assert_eq!(r.verdict, ReportVerdict::NumericallyAbove);
    assert_eq!(r.label, "numerical");
    let sq = find("sq-minus-1").unwrap();
    let r = run_bq4e("sq-minus-1", &sq.bq4e, None, &cfg(8)).unwrap();
    assert_eq!(r.verdict, ReportVerdict::CertifiedYes, "{r:?}");
}

#[test]
fn definite_systems_are_numerically_below() {
    for name in ["unit-line", "identity-3"] {
        let r = run_hqsf_pipeline(&find_hqsf(name).unwrap(), &cfg(8)).unwrap();
        assert_eq!(r.verdict, ReportVerdict::NumericallyBelow, "{name}");
    }
}

#[test]
fn order_lift_margins() {
    let c = PipelineConfig {
        order: Some(5),
        ..cfg(8)
    };
    let r = run_hqsf_pipeline(&find_hqsf("pythagorean").unwrap(), &c).unwrap();
    assert!(r.margins.lifted.as_ref().unwrap().certified);
    let r = run_hqsf_pipeline(&find_hqsf("diag-pm").unwrap(), &c).unwrap();
    let lifted = r.margins.lifted.unwrap();
    assert!(!lifted.certified, "|(1, 1)|^2 = 2 is not a square");
    assert!(lifted.margin.unwrap().abs() < 1e-6 * lifted.threshold);
    assert!(PipelineConfig {
        order: Some(4),
        ..cfg(1)
    }
    .validate()
    .is_err());
}

#[test]
fn reports_are_reproducible() {
    let inst = find("skew-square").unwrap();
    let a = run_pipeline(&inst, &cfg(4)).unwrap();
    let b = run_pipeline(&inst, &cfg(4)).unwrap();
    assert_eq!(a.fingerprint(), b.fingerprint());
    assert_eq!(a.without_timings(), b.without_timings());
    let c = run_pipeline(
        &inst,
        &PipelineConfig {
            ascent: AscentConfig::default().with_restarts(4).with_seed(6),
            ..cfg(4)
        },
    )
    .unwrap();
    assert_ne!(
        a.fingerprint(),
        c.fingerprint(),
        "the seed is part of the report"
    );
}

#[test]
fn stage_digests_chain() {
    let r = run_pipeline(&find("sq-plus-1").unwrap(), &cfg(2)).unwrap();
    let by_name = |n: &str| r.stages.iter().find(|s| s.name == n).unwrap();
    assert_eq!(
        by_name("reduce-box").output_digest,
        by_name("reduce-tensor").input_digest
    );
    assert_eq!(
        by_name("reduce-tensor").output_digest,
        by_name("tensorize").input_digest
    );
    assert_eq!(
        by_name("reduce-tensor").output_digest,
        by_name("maximize").input_digest
    );
    assert_eq!(
        by_name("reduce-box").output_digest,
        by_name("residual").input_digest
    );
    assert!(r
        .stages
        .iter()
        .all(|s| s.input_digest.len() == 64 && s.output_digest.len() == 64));
}

fn diag_pm_doc() -> Document {
    Document::System(SystemDoc::from_hqsf(
        &find_hqsf("diag-pm").unwrap().instance,
    ))
}

#[test]
fn verify_examples() {
    let doc = diag_pm_doc();
    let w = |a: i64, b: i64| WitnessDoc::exact(&[rat(a, 1), rat(b, 1)]);
    assert_eq!(
        verify_witness(&doc, &w(1, 1)).unwrap(),
        VerifyOutcome::Accept
    );
    assert!(matches!(
        verify_witness(&doc, &w(1, 0)).unwrap(),
        VerifyOutcome::Reject {
            form_index: Some(0),
            ..
        }
    ));
    assert_eq!(
        verify_witness(&doc, &w(7, 7)).unwrap(),
        VerifyOutcome::Accept
    );
    assert!(matches!(
        verify_witness(&doc, &w(0, 0)).unwrap(),
        VerifyOutcome::Reject {
            form_index: None,
            ..
        }
    ));
    assert!(verify_witness(&doc, &WitnessDoc::exact(&[rat(1, 1)])).is_err());
}

#[test]
fn verify_box_points_and_compiled_witnesses() {
    let inst = find("sq-minus-1").unwrap();
    let doc = Document::Bq4e(spectral_threshold::format::Bq4eDoc::from_instance(
        &inst.bq4e,
    ));
    assert_eq!(
        verify_witness(&doc, &WitnessDoc::exact(&[rat(-1, 1)])).unwrap(),
        VerifyOutcome::Accept
    );
    assert!(matches!(
        verify_witness(&doc, &WitnessDoc::exact(&[rat(1, 2)])).unwrap(),
        VerifyOutcome::Reject { .. }
    ));
    assert!(matches!(
        verify_witness(&doc, &WitnessDoc::exact(&[rat(2, 1)])).unwrap(),
        VerifyOutcome::Reject { .. }
    ));
    let r = run_pipeline(&inst, &cfg(1)).unwrap();
    let y = r.exact_witness_values().unwrap().unwrap();
    assert_eq!(
        verify_witness(&doc, &WitnessDoc::exact(&y)).unwrap(),
        VerifyOutcome::Accept
    );
    let mut bad = y.clone();
    bad[3] += rat(1, 1);
    assert!(matches!(
        verify_witness(&doc, &WitnessDoc::exact(&bad)).unwrap(),
        VerifyOutcome::Reject {
            form_index: Some(_),
            ..
        }
    ));
}

#[test]
fn affine_system_separates_yes_from_no() {
    let c = AscentConfig::default().with_restarts(24).with_seed(1);
    let no = compile_affine(&find("sq-plus-1").unwrap().bq4e).0;
    let floor = residual_min(&no, &c).unwrap().value;
    assert!(floor > 1e-6, "{floor}");
    let yes = compile_affine(&find("sq-minus-1").unwrap().bq4e).0;
    let zero = residual_min(&yes, &c).unwrap().value;
    assert!(zero < 1e-12, "{zero}");
}
