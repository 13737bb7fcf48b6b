//! Versioned JSON documents for every artifact the pipeline reads or writes.
//!
//! Rationals are always strings (`"-3/4"`, `"2"`). Polynomials are term lists
//! with dense exponent vectors; quadratic forms are dense row-major matrices.
//! Tensor indices are 0-based and sorted.

use std::path::Path;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use spectral_threshold_core::algebra::{format_rational, parse_rational};
use spectral_threshold_core::numopt::MaxEstimate;
use spectral_threshold_core::reduce_box::{
    AffinePart, Bq4eInstance, Constraint, ConstraintKind, QuadraticSystem, SystemMode, VarLayout,
};
use spectral_threshold_core::reduce_tensor::{HqsfInstance, QuarticCertificateData};
use spectral_threshold_core::symtensor::{gamma_sq, SymmetricTensor, ThresholdInstance};
use spectral_threshold_core::{Polynomial, QuadraticForm, Rational};

use crate::error::{HarnessError, Result};
use crate::pipeline::PipelineReport;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDoc {
    pub exponents: Vec<u32>,
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bq4eDoc {
    pub version: u32,
    pub n: usize,
    pub h: Vec<TermDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeDoc {
    Homogeneous,
    Affine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutDoc {
    pub n: usize,
    pub slacks: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDoc {
    pub version: u32,
    #[serde(rename = "N")]
    pub dimension: usize,
    pub mode: ModeDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<LayoutDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
    pub forms: Vec<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarticDoc {
    pub version: u32,
    #[serde(rename = "N")]
    pub dimension: usize,
    #[serde(rename = "C")]
    pub c: String,
    #[serde(rename = "B")]
    pub b: String,
    pub p: Vec<TermDoc>,
    pub forms: Vec<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryDoc {
    pub idx: Vec<usize>,
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorDoc {
    pub version: u32,
    pub n: usize,
    pub d: usize,
    pub entries: Vec<EntryDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdDoc {
    pub version: u32,
    pub n: usize,
    pub d: usize,
    pub entries: Vec<EntryDoc>,
    #[serde(rename = "B")]
    pub b: String,
    pub gamma_sq: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub version: u32,
    pub y: Vec<String>,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateDoc {
    pub version: u32,
    pub value: f64,
    pub argmax: Vec<f64>,
    pub converged: bool,
    pub restarts_used: usize,
    pub iterations: usize,
    /// Always "numerical": floats never certify.
    pub label: String,
}

/// Any file the tools read or write, discriminated by its `kind` field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Document {
    Bq4e(Bq4eDoc),
    System(SystemDoc),
    Quartic(QuarticDoc),
    Tensor(TensorDoc),
    Threshold(ThresholdDoc),
    Witness(WitnessDoc),
    Estimate(EstimateDoc),
    Report(PipelineReport),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Bq4e(_) => "bq4e",
            Document::System(_) => "system",
            Document::Quartic(_) => "quartic",
            Document::Tensor(_) => "tensor",
            Document::Threshold(_) => "threshold",
            Document::Witness(_) => "witness",
            Document::Estimate(_) => "estimate",
            Document::Report(_) => "report",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    /// Compact serialization used for content digests.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Document> {
        let doc: Document = serde_json::from_str(text)?;
        let version = match &doc {
            Document::Bq4e(d) => d.version,
            Document::System(d) => d.version,
            Document::Quartic(d) => d.version,
            Document::Tensor(d) => d.version,
            Document::Threshold(d) => d.version,
            Document::Witness(d) => d.version,
            Document::Estimate(d) => d.version,
            Document::Report(d) => d.version,
        };
        if version != FORMAT_VERSION {
            return Err(HarnessError::Format(format!(
                "unsupported version {version}"
            )));
        }
        Ok(doc)
    }

    pub fn read(path: &Path) -> Result<Document> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Document::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Hex SHA-256 of a document's canonical serialization.
pub fn digest(doc: &Document) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(doc.canonical_bytes()))
}

fn rat(s: &str) -> Result<Rational> {
    Ok(parse_rational(s)?)
}

fn rats(v: &[String]) -> Result<Vec<Rational>> {
    v.iter().map(|s| rat(s)).collect()
}

pub fn poly_to_doc(p: &Polynomial) -> Vec<TermDoc> {
    p.terms()
        .map(|(m, c)| TermDoc {
            exponents: m.exponents(p.variable_count()),
            coeff: format_rational(c),
        })
        .collect()
}

pub fn poly_from_doc(n: usize, terms: &[TermDoc]) -> Result<Polynomial> {
    let pairs = terms
        .iter()
        .map(|t| Ok((t.exponents.clone(), rat(&t.coeff)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Polynomial::from_terms(n, pairs)?)
}

pub fn form_to_doc(q: &QuadraticForm) -> Vec<Vec<String>> {
    q.rows()
        .map(|r| r.iter().map(format_rational).collect())
        .collect()
}

pub fn form_from_doc(rows: &[Vec<String>]) -> Result<QuadraticForm> {
    let rows = rows.iter().map(|r| rats(r)).collect::<Result<Vec<_>>>()?;
    Ok(QuadraticForm::from_rows(rows)?)
}

pub fn kind_label(kind: ConstraintKind) -> String {
    match kind {
        ConstraintKind::Box(i) => format!("box({i})"),
        ConstraintKind::Lift(a, b) => format!("lift({a},{b})"),
        ConstraintKind::Tie(a) => format!("tie({a})"),
        ConstraintKind::Slack(a, b) => format!("slack({a},{b})"),
        ConstraintKind::Quartic => "quartic".into(),
        ConstraintKind::Given => "given".into(),
    }
}

pub fn parse_kind_label(s: &str) -> Result<ConstraintKind> {
    let bad = || HarnessError::Format(format!("unknown constraint label {s:?}"));
    let args = |inner: &str| -> Result<Vec<usize>> {
        inner
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
            .collect()
    };
    if s == "quartic" {
        return Ok(ConstraintKind::Quartic);
    }
    if s == "given" {
        return Ok(ConstraintKind::Given);
    }
    let (head, rest) = s.split_once('(').ok_or_else(bad)?;
    let inner = rest.strip_suffix(')').ok_or_else(bad)?;
    let a = args(inner)?;
    match (head, a.as_slice()) {
        ("box", [i]) => Ok(ConstraintKind::Box(*i)),
        ("lift", [a, b]) => Ok(ConstraintKind::Lift(*a, *b)),
        ("tie", [a]) => Ok(ConstraintKind::Tie(*a)),
        ("slack", [a, b]) => Ok(ConstraintKind::Slack(*a, *b)),
        _ => Err(bad()),
    }
}

impl Bq4eDoc {
    pub fn from_instance(inst: &Bq4eInstance) -> Self {
        Bq4eDoc {
            version: FORMAT_VERSION,
            n: inst.n(),
            h: poly_to_doc(inst.h()),
        }
    }

    pub fn to_instance(&self) -> Result<Bq4eInstance> {
        Ok(Bq4eInstance::new(poly_from_doc(self.n, &self.h)?)?)
    }
}

impl SystemDoc {
    pub fn from_system(sys: &QuadraticSystem, layout: Option<&VarLayout>) -> Self {
        let affine = sys.mode() == SystemMode::Affine;
        let zero_part = || AffinePart {
            linear: vec![Rational::from_integer(0.into()); sys.dimension()],
            constant: Rational::from_integer(0.into()),
        };
        let parts: Vec<AffinePart> = if affine {
            sys.constraints()
                .iter()
                .map(|c| c.affine.clone().unwrap_or_else(zero_part))
                .collect()
        } else {
            Vec::new()
        };
        SystemDoc {
            version: FORMAT_VERSION,
            dimension: sys.dimension(),
            mode: if affine {
                ModeDoc::Affine
            } else {
                ModeDoc::Homogeneous
            },
            layout: layout.map(|l| LayoutDoc {
                n: l.n(),
                slacks: l.has_slacks(),
            }),
            labels: sys
                .constraints()
                .iter()
                .map(|c| kind_label(c.kind))
                .collect(),
            forms: sys.forms().map(form_to_doc).collect(),
            linear: affine.then(|| {
                parts
                    .iter()
                    .map(|p| p.linear.iter().map(format_rational).collect())
                    .collect()
            }),
            constants: affine.then(|| parts.iter().map(|p| format_rational(&p.constant)).collect()),
        }
    }

    pub fn from_hqsf(inst: &HqsfInstance) -> Self {
        SystemDoc::from_system(&inst.to_system(), None)
    }

    pub fn to_system(&self) -> Result<QuadraticSystem> {
        let count = self.forms.len();
        if !self.labels.is_empty() && self.labels.len() != count {
            return Err(HarnessError::Format(
                "labels and forms differ in length".into(),
            ));
        }
        let mode = match self.mode {
            ModeDoc::Homogeneous => SystemMode::Homogeneous,
            ModeDoc::Affine => SystemMode::Affine,
        };
        let (linear, constants) = match (mode, &self.linear, &self.constants) {
            (SystemMode::Affine, Some(l), Some(c)) if l.len() == count && c.len() == count => {
                (Some(l), Some(c))
            }
            (SystemMode::Affine, _, _) => {
                return Err(HarnessError::Format(
                    "affine system needs one linear part and constant per form".into(),
                ))
            }
            (SystemMode::Homogeneous, None, None) => (None, None),
            (SystemMode::Homogeneous, _, _) => {
                return Err(HarnessError::Format(
                    "homogeneous system carries linear parts".into(),
                ))
            }
        };
        let mut constraints = Vec::with_capacity(count);
        for k in 0..count {
            let kind = match self.labels.get(k) {
                Some(l) => parse_kind_label(l)?,
                None => ConstraintKind::Given,
            };
            let affine = match (linear, constants) {
                (Some(l), Some(c)) => {
                    let part = AffinePart {
                        linear: rats(&l[k])?,
                        constant: rat(&c[k])?,
                    };
                    let trivial = part.constant.is_zero() && part.linear.iter().all(Zero::is_zero);
                    (!trivial).then_some(part)
                }
                _ => None,
            };
            constraints.push(Constraint {
                kind,
                form: form_from_doc(&self.forms[k])?,
                affine,
            });
        }
        let sys = QuadraticSystem::new(self.dimension, mode, constraints)?;
        if let Some(l) = self.layout() {
            if l.dimension() != self.dimension {
                return Err(HarnessError::Format("layout does not match N".into()));
            }
        }
        Ok(sys)
    }

    pub fn layout(&self) -> Option<VarLayout> {
        self.layout.map(|l| {
            if l.slacks {
                VarLayout::homogeneous(l.n)
            } else {
                VarLayout::affine(l.n)
            }
        })
    }

    pub fn to_hqsf(&self) -> Result<HqsfInstance> {
        Ok(HqsfInstance::from_system(&self.to_system()?)?)
    }
}

impl QuarticDoc {
    pub fn from_data(data: &QuarticCertificateData) -> Self {
        QuarticDoc {
            version: FORMAT_VERSION,
            dimension: data.dimension(),
            c: format_rational(data.c()),
            b: format_rational(data.b()),
            p: poly_to_doc(data.p()),
            forms: data.forms().iter().map(form_to_doc).collect(),
        }
    }

    pub fn to_data(&self) -> Result<QuarticCertificateData> {
        let forms = self
            .forms
            .iter()
            .map(|f| form_from_doc(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(QuarticCertificateData::from_parts(
            forms,
            rat(&self.c)?,
            rat(&self.b)?,
            poly_from_doc(self.dimension, &self.p)?,
        )?)
    }
}

fn entries_to_doc(t: &SymmetricTensor) -> Vec<EntryDoc> {
    t.entries()
        .map(|(idx, v)| EntryDoc {
            idx: idx.to_vec(),
            coeff: format_rational(v),
        })
        .collect()
}

fn tensor_from_entries(n: usize, d: usize, entries: &[EntryDoc]) -> Result<SymmetricTensor> {
    for e in entries {
        if e.idx.windows(2).any(|w| w[0] > w[1]) {
            return Err(HarnessError::Format(format!(
                "index tuple {:?} is not sorted",
                e.idx
            )));
        }
    }
    let pairs = entries
        .iter()
        .map(|e| Ok((e.idx.clone(), rat(&e.coeff)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SymmetricTensor::from_entries(n, d, pairs)?)
}

impl TensorDoc {
    pub fn from_tensor(t: &SymmetricTensor) -> Self {
        TensorDoc {
            version: FORMAT_VERSION,
            n: t.dimension(),
            d: t.order(),
            entries: entries_to_doc(t),
        }
    }

    pub fn to_tensor(&self) -> Result<SymmetricTensor> {
        tensor_from_entries(self.n, self.d, &self.entries)
    }
}

impl ThresholdDoc {
    pub fn from_instance(inst: &ThresholdInstance) -> Self {
        let t = inst.tensor();
        ThresholdDoc {
            version: FORMAT_VERSION,
            n: t.dimension(),
            d: t.order(),
            entries: entries_to_doc(t),
            b: format_rational(inst.threshold_base()),
            gamma_sq: format_rational(&inst.gamma_sq()),
        }
    }

    pub fn to_instance(&self) -> Result<ThresholdInstance> {
        if rat(&self.gamma_sq)? != gamma_sq(self.d) {
            return Err(HarnessError::Format(format!(
                "gamma_sq does not match order {}",
                self.d
            )));
        }
        let t = tensor_from_entries(self.n, self.d, &self.entries)?;
        Ok(ThresholdInstance::new(t, rat(&self.b)?)?)
    }
}

impl WitnessDoc {
    pub fn exact(y: &[Rational]) -> Self {
        WitnessDoc {
            version: FORMAT_VERSION,
            y: y.iter().map(format_rational).collect(),
            exact: true,
        }
    }

    /// Stores the binary values of a float vector exactly, flagged inexact.
    pub fn inexact(y: &[f64]) -> Result<Self> {
        let exact = spectral_threshold_core::reduce_box::from_f64_vec(y)?;
        Ok(WitnessDoc {
            version: FORMAT_VERSION,
            y: exact.iter().map(format_rational).collect(),
            exact: false,
        })
    }

    pub fn values(&self) -> Result<Vec<Rational>> {
        rats(&self.y)
    }
}

impl EstimateDoc {
    pub fn from_estimate(e: &MaxEstimate) -> Self {
        EstimateDoc {
            version: FORMAT_VERSION,
            value: e.value,
            argmax: e.argmax.clone(),
            converged: e.converged,
            restarts_used: e.restarts_used,
            iterations: e.iterations,
            label: "numerical".into(),
        }
    }
}
