//! End-to-end runs: box problem, quadratic system, quartic, tensor threshold,
//! then either an exact certificate or numerical margins.

use std::time::Instant;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use spectral_threshold_core::algebra::{format_rational, rational_to_f64};
use spectral_threshold_core::numopt::{
    maximize_quartic, maximize_sym, rationalize, residual_min, AscentConfig, FormObjective,
    MaxEstimate,
};
use spectral_threshold_core::reduce_box::{
    compile_homogeneous, rational_sqrt, witness_forward, BoxWitness, Bq4eInstance, QuadraticSystem,
    SystemMode,
};
use spectral_threshold_core::reduce_tensor::{
    build_quartic, certify_max, lift_order, tensorize, threshold_compare, HqsfInstance, OrderLift,
    QuarticCertificateData, Verdict,
};
use spectral_threshold_core::symtensor::ThresholdInstance;
use spectral_threshold_core::{Error as CoreError, Rational};

use crate::error::{HarnessError, Result};
use crate::format::{
    digest, Bq4eDoc, Document, EstimateDoc, QuarticDoc, SystemDoc, ThresholdDoc, WitnessDoc,
    FORMAT_VERSION,
};
use crate::library::{HqsfLibraryInstance, LibraryInstance};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub ascent: AscentConfig,
    /// Also lift to this tensor order (at least 5).
    pub order: Option<usize>,
    /// Relative tolerance for "numerically at the threshold".
    pub tolerance: f64,
    /// Denominator cap when rationalizing a float near-zero.
    pub max_denominator: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            ascent: AscentConfig::default(),
            order: None,
            tolerance: 1e-6,
            max_denominator: 1 << 20,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.ascent.validate()?;
        if !(0.0..1.0).contains(&self.tolerance) {
            return Err(HarnessError::Input("tolerance must lie in [0, 1)".into()));
        }
        if matches!(self.order, Some(d) if d < 5) {
            return Err(HarnessError::Input("lift order must be at least 5".into()));
        }
        if self.max_denominator == 0 {
            return Err(HarnessError::Input(
                "max denominator must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub input_digest: String,
    pub output_digest: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportVerdict {
    CertifiedYes,
    NumericallyAbove,
    NumericallyBelow,
    /// Sphere maximization and residual minimization disagree.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedMargins {
    pub order: usize,
    /// `B * gamma_d`.
    pub threshold: f64,
    pub estimate: Option<f64>,
    pub margin: Option<f64>,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    /// `B`, the threshold for the quartic.
    pub threshold: f64,
    pub max_estimate: Option<f64>,
    /// `B - max_estimate`.
    pub max_margin: Option<f64>,
    /// Minimum of the summed squared residuals on the unit sphere.
    pub residual_min: Option<f64>,
    pub lifted: Option<LiftedMargins>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub version: u32,
    pub instance: String,
    #[serde(rename = "N")]
    pub dimension: usize,
    pub seed: u64,
    pub verdict: ReportVerdict,
    /// "exact" for certified verdicts, "numerical" for everything else.
    pub label: String,
    pub stages: Vec<StageRecord>,
    pub margins: Margins,
    pub exact_witness: Option<Vec<String>>,
}

impl PipelineReport {
    pub fn without_timings(&self) -> PipelineReport {
        let mut r = self.clone();
        for s in &mut r.stages {
            s.seconds = 0.0;
        }
        r
    }

    /// Canonical JSON with timings zeroed; identical runs give identical
    /// bytes.
    pub fn fingerprint(&self) -> Vec<u8> {
        Document::Report(self.without_timings()).canonical_bytes()
    }

    pub fn exact_witness_values(&self) -> Result<Option<Vec<Rational>>> {
        match &self.exact_witness {
            None => Ok(None),
            Some(y) => Ok(Some(
                WitnessDoc {
                    version: FORMAT_VERSION,
                    y: y.clone(),
                    exact: true,
                }
                .values()?,
            )),
        }
    }
}

#[derive(Default)]
struct StageLog {
    records: Vec<StageRecord>,
}

impl StageLog {
    fn run<T>(
        &mut self,
        name: &'static str,
        input_digest: &str,
        work: impl FnOnce() -> std::result::Result<T, CoreError>,
        render: impl FnOnce(&T) -> Result<Document>,
    ) -> Result<(T, String)> {
        let start = Instant::now();
        let out = work().map_err(HarnessError::stage(name))?;
        let seconds = start.elapsed().as_secs_f64();
        let output_digest = digest(&render(&out)?);
        self.records.push(StageRecord {
            name: name.into(),
            input_digest: input_digest.into(),
            output_digest: output_digest.clone(),
            seconds,
        });
        Ok((out, output_digest))
    }
}

pub fn run_pipeline(inst: &LibraryInstance, cfg: &PipelineConfig) -> Result<PipelineReport> {
    run_bq4e(inst.name, &inst.bq4e, inst.witness.as_ref(), cfg)
}

pub fn run_hqsf_pipeline(
    inst: &HqsfLibraryInstance,
    cfg: &PipelineConfig,
) -> Result<PipelineReport> {
    run_hqsf(inst.name, &inst.instance, inst.witness.as_deref(), cfg)
}

/// Full chain from a box problem. A box witness whose forward image is
/// rational is certified exactly; otherwise the verdict is numerical.
pub fn run_bq4e(
    name: &str,
    inst: &Bq4eInstance,
    witness: Option<&BoxWitness>,
    cfg: &PipelineConfig,
) -> Result<PipelineReport> {
    cfg.validate()?;
    let mut log = StageLog::default();
    let input = digest(&Document::Bq4e(Bq4eDoc::from_instance(inst)));
    let ((sys, layout), sys_digest) = log.run(
        "reduce-box",
        &input,
        || Ok(compile_homogeneous(inst)),
        |(s, l)| Ok(Document::System(SystemDoc::from_system(s, Some(l)))),
    )?;
    debug_assert_eq!(layout.dimension(), sys.dimension());
    let mut exact = None;
    if let Some(xi) = witness {
        let xi_digest = digest(&Document::Witness(WitnessDoc::exact(xi.coords())));
        let forward = log.run(
            "forward-witness",
            &xi_digest,
            || match witness_forward(inst, xi) {
                Ok(y) => Ok(Some(y.coords().to_vec())),
                Err(CoreError::Inexact(_)) => Ok(None),
                Err(e) => Err(e),
            },
            |y| {
                Ok(Document::Witness(WitnessDoc::exact(
                    y.as_deref().unwrap_or(&[]),
                )))
            },
        )?;
        exact = forward.0;
    }
    finish(name, &sys, &sys_digest, exact, cfg, log)
}

/// Chain from forms given directly on the sphere.
pub fn run_hqsf(
    name: &str,
    inst: &HqsfInstance,
    witness: Option<&[Rational]>,
    cfg: &PipelineConfig,
) -> Result<PipelineReport> {
    cfg.validate()?;
    let sys = inst.to_system();
    let sys_digest = digest(&Document::System(SystemDoc::from_system(&sys, None)));
    if let Some(y) = witness {
        if y.len() != sys.dimension() {
            return Err(CoreError::Dimension {
                expected: sys.dimension(),
                got: y.len(),
            }
            .into());
        }
    }
    finish(
        name,
        &sys,
        &sys_digest,
        witness.map(<[Rational]>::to_vec),
        cfg,
        StageLog::default(),
    )
}

fn estimate_doc(e: &MaxEstimate) -> Result<Document> {
    Ok(Document::Estimate(EstimateDoc::from_estimate(e)))
}

/// `(y, t, ..., t)` with `t = |y| / 2`, which maximizes the lifted form along
/// the direction of `y`. Rational only when `|y|^2` is a rational square.
pub fn lifted_witness(y: &[Rational], d: usize) -> Option<Vec<Rational>> {
    let norm_sq = y.iter().map(|v| v * v).fold(Rational::zero(), |a, b| a + b);
    let t = rational_sqrt(&norm_sq)? / Rational::from_integer(2.into());
    let mut out = y.to_vec();
    out.extend(std::iter::repeat_n(t, d.saturating_sub(4)));
    Some(out)
}

fn finish(
    name: &str,
    sys: &QuadraticSystem,
    sys_digest: &str,
    witness: Option<Vec<Rational>>,
    cfg: &PipelineConfig,
    mut log: StageLog,
) -> Result<PipelineReport> {
    if sys.mode() != SystemMode::Homogeneous {
        return Err(HarnessError::Input(
            "the tensor stages need a homogeneous system".into(),
        ));
    }
    let hq = HqsfInstance::from_system(sys).map_err(HarnessError::stage("reduce-tensor"))?;
    let (data, quartic_digest) = log.run(
        "reduce-tensor",
        sys_digest,
        || build_quartic(&hq),
        |d| Ok(Document::Quartic(QuarticDoc::from_data(d))),
    )?;
    let (threshold, _) = log.run(
        "tensorize",
        &quartic_digest,
        || Ok(tensorize(&data)),
        |t| Ok(Document::Threshold(ThresholdDoc::from_instance(t))),
    )?;
    let lift = match cfg.order {
        Some(d) => {
            let ((lift, inst), _) = log.run(
                "lift-order",
                &quartic_digest,
                || {
                    let lift = lift_order(&data, d)?;
                    let inst = lift.threshold_instance()?;
                    Ok((lift, inst))
                },
                |(_, inst)| Ok(Document::Threshold(ThresholdDoc::from_instance(inst))),
            )?;
            Some((lift, inst))
        }
        None => None,
    };

    let b = rational_to_f64(data.b());
    let mut margins = Margins {
        threshold: b,
        max_estimate: None,
        max_margin: None,
        residual_min: None,
        lifted: None,
    };
    let mut verdict = None;
    let mut exact_witness = None;

    if let Some(y) = witness.filter(|y| !y.iter().all(Zero::is_zero)) {
        let (ok, _) = certify_stage(&mut log, &data, &threshold, &y)?;
        if ok {
            verdict = Some(ReportVerdict::CertifiedYes);
            exact_witness = Some(y);
        }
    }

    if verdict.is_none() {
        let (est, _) = log.run(
            "maximize",
            &quartic_digest,
            || maximize_quartic(&data, &cfg.ascent),
            estimate_doc,
        )?;
        let (res, _) = log.run(
            "residual",
            sys_digest,
            || residual_min(sys, &cfg.ascent),
            estimate_doc,
        )?;
        let cmp = threshold_compare(&threshold, est.value, None, cfg.tolerance)?;
        margins.max_estimate = Some(est.value);
        margins.max_margin = Some(b - est.value);
        margins.residual_min = Some(res.value);
        let max_above = cmp.verdict == Verdict::NumericallyAbove;
        let residual_feasible = res.value <= cfg.tolerance * b;
        verdict = Some(match (max_above, residual_feasible) {
            (true, true) => {
                let mut found = None;
                for candidate in [&res.argmax, &est.argmax] {
                    let y = rationalize(candidate, cfg.max_denominator);
                    if y.iter().all(Zero::is_zero) {
                        continue;
                    }
                    if certify_stage(&mut log, &data, &threshold, &y)?.0 {
                        found = Some(y);
                        break;
                    }
                }
                match found {
                    Some(y) => {
                        exact_witness = Some(y);
                        ReportVerdict::CertifiedYes
                    }
                    None => ReportVerdict::NumericallyAbove,
                }
            }
            (false, false) => ReportVerdict::NumericallyBelow,
            _ => ReportVerdict::Unknown,
        });
    }

    if let Some((lift, inst)) = &lift {
        margins.lifted = Some(lifted_margins(
            &mut log,
            lift,
            inst,
            exact_witness.as_deref(),
            &quartic_digest,
            cfg,
        )?);
    }

    let verdict = verdict.expect("set above");
    Ok(PipelineReport {
        version: FORMAT_VERSION,
        instance: name.into(),
        dimension: sys.dimension(),
        seed: cfg.ascent.seed,
        verdict,
        label: if verdict == ReportVerdict::CertifiedYes {
            "exact"
        } else {
            "numerical"
        }
        .into(),
        stages: log.records,
        margins,
        exact_witness: exact_witness.map(|y| y.iter().map(format_rational).collect()),
    })
}

fn certify_stage(
    log: &mut StageLog,
    data: &QuarticCertificateData,
    threshold: &ThresholdInstance,
    y: &[Rational],
) -> Result<(bool, String)> {
    let input = digest(&Document::Witness(WitnessDoc::exact(y)));
    log.run(
        "certify",
        &input,
        || {
            let at_max = certify_max(data, y)?;
            let above = threshold.certifies(y)?;
            if at_max != above {
                return Err(CoreError::Invariant(
                    "quartic and tensor certificates disagree".into(),
                ));
            }
            Ok(at_max)
        },
        |_| Ok(Document::Witness(WitnessDoc::exact(y))),
    )
}

fn lifted_margins(
    log: &mut StageLog,
    lift: &OrderLift,
    inst: &ThresholdInstance,
    witness: Option<&[Rational]>,
    quartic_digest: &str,
    cfg: &PipelineConfig,
) -> Result<LiftedMargins> {
    let threshold = lift.threshold_f64();
    let mut out = LiftedMargins {
        order: lift.d,
        threshold,
        estimate: None,
        margin: None,
        certified: false,
    };
    if let Some(lifted) = witness.and_then(|y| lifted_witness(y, lift.d)) {
        if inst
            .certifies(&lifted)
            .map_err(HarnessError::stage("lift-certify"))?
        {
            out.certified = true;
            return Ok(out);
        }
    }
    let (est, _) = log.run(
        "lift-maximize",
        quartic_digest,
        || maximize_sym(&FormObjective::from_polynomial(&lift.p_d), &cfg.ascent),
        estimate_doc,
    )?;
    out.estimate = Some(est.value);
    out.margin = Some(threshold - est.value);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum VerifyOutcome {
    Accept,
    Reject {
        form_index: Option<usize>,
        reason: String,
    },
}

fn reject(form_index: Option<usize>, reason: impl Into<String>) -> VerifyOutcome {
    VerifyOutcome::Reject {
        form_index,
        reason: reason.into(),
    }
}

fn check_system(sys: &QuadraticSystem, y: &[Rational]) -> Result<VerifyOutcome> {
    if y.len() != sys.dimension() {
        return Err(CoreError::Dimension {
            expected: sys.dimension(),
            got: y.len(),
        }
        .into());
    }
    if sys.mode() == SystemMode::Homogeneous && y.iter().all(Zero::is_zero) {
        return Ok(reject(None, "zero vector is not a sphere witness"));
    }
    Ok(match sys.first_violation(y)? {
        Some(k) => reject(Some(k), format!("form {k} does not vanish")),
        None => VerifyOutcome::Accept,
    })
}

/// Exact verification of a witness against any instance-like document.
///
/// Box problems accept either a box point (length `n`) or a point of the
/// compiled homogeneous system.
pub fn verify_witness(doc: &Document, witness: &WitnessDoc) -> Result<VerifyOutcome> {
    let y = witness.values()?;
    match doc {
        Document::Bq4e(d) => {
            let inst = d.to_instance()?;
            if y.len() == inst.n() {
                let Ok(xi) = BoxWitness::new(y) else {
                    return Ok(reject(None, "point outside [-1, 1]^n"));
                };
                return Ok(if inst.h().eval(xi.coords())?.is_zero() {
                    VerifyOutcome::Accept
                } else {
                    reject(Some(0), "h does not vanish")
                });
            }
            check_system(&compile_homogeneous(&inst).0, &y)
        }
        Document::System(d) => check_system(&d.to_system()?, &y),
        Document::Quartic(d) => {
            let data = d.to_data()?;
            if y.len() != data.dimension() {
                return Err(CoreError::Dimension {
                    expected: data.dimension(),
                    got: y.len(),
                }
                .into());
            }
            if y.iter().all(Zero::is_zero) {
                return Ok(reject(None, "zero vector is not a sphere witness"));
            }
            if certify_max(&data, &y)? {
                return Ok(VerifyOutcome::Accept);
            }
            let k = data
                .forms()
                .iter()
                .position(|f| !f.eval(&y).map(|v| v.is_zero()).unwrap_or(false));
            Ok(reject(k, "p(y) < B |y|^4"))
        }
        Document::Threshold(d) => {
            let inst = d.to_instance()?;
            if y.len() != inst.tensor().dimension() {
                return Err(CoreError::Dimension {
                    expected: inst.tensor().dimension(),
                    got: y.len(),
                }
                .into());
            }
            if y.iter().all(Zero::is_zero) {
                return Ok(reject(None, "zero vector"));
            }
            Ok(if inst.certifies(&y)? {
                VerifyOutcome::Accept
            } else {
                reject(None, "below the threshold")
            })
        }
        other => Err(HarnessError::Input(format!(
            "cannot verify a witness against a {} document",
            other.kind()
        ))),
    }
}
