use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spectral_threshold::config::ConfigOverrides;
use spectral_threshold::format::{
    Bq4eDoc, Document, EstimateDoc, QuarticDoc, SystemDoc, ThresholdDoc, WitnessDoc,
};
use spectral_threshold::library::{find, find_hqsf, hqsf_library, library, Status};
use spectral_threshold::pipeline::{
    run_bq4e, run_hqsf, run_hqsf_pipeline, run_pipeline, verify_witness, PipelineConfig,
    PipelineReport, VerifyOutcome,
};
use spectral_threshold::{HarnessError, Result};
use spectral_threshold_core::numopt::{
    maximize_multilinear, maximize_quartic, maximize_tensor, residual_min, residual_min_restricted,
};
use spectral_threshold_core::reduce_box::{compile_affine, compile_homogeneous, BoxWitness};
use spectral_threshold_core::reduce_tensor::{build_quartic, lift_order, tensorize};

#[derive(Parser)]
#[command(
    name = "spectral-threshold",
    version,
    about = "Box-root feasibility to symmetric tensor thresholds"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for the restart generator.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Which quadratic system reduce-box emits.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Homogeneous)]
    mode: Mode,
    /// JSON file of optimizer settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    /// Relative tolerance for threshold comparisons.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Power-iteration shift.
    #[arg(long, global = true)]
    shift: Option<f64>,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Homogeneous,
    Affine,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a bq4e file to a quadratic system.
    ReduceBox { input: PathBuf },
    /// Build the certificate quartic of a homogeneous system.
    ReduceTensor {
        input: PathBuf,
        /// Emit the order-4 threshold instance instead of the quartic.
        #[arg(long)]
        threshold: bool,
    },
    /// Lift a quartic to a threshold instance of higher order.
    LiftOrder {
        input: PathBuf,
        #[arg(long)]
        order: usize,
    },
    /// Estimate the sphere maximum of a quartic or tensor.
    Maximize {
        input: PathBuf,
        /// Maximize over independent unit vectors instead of the diagonal.
        #[arg(long)]
        multilinear: bool,
    },
    /// Minimize the summed squared residuals of a system on the sphere.
    Residual {
        input: PathBuf,
        /// Hold the homogenizing coordinate at zero.
        #[arg(long)]
        x0_slice: bool,
    },
    /// Check a witness exactly against an instance, system, quartic or
    /// threshold file.
    Verify { instance: PathBuf, witness: PathBuf },
    /// Run the whole chain on a file or a library instance.
    Pipeline {
        input: Option<PathBuf>,
        #[arg(long, conflicts_with = "input")]
        library: Option<String>,
        /// Optional witness file for a file input.
        #[arg(long, requires = "input")]
        witness: Option<PathBuf>,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Inspect or export the instance library.
    Library {
        #[command(subcommand)]
        action: LibraryAction,
    },
}

#[derive(Subcommand)]
enum LibraryAction {
    List,
    /// Write every instance (and witness) as files into a directory.
    Write {
        dir: PathBuf,
    },
}

enum Output {
    Doc(Document),
    Verify(VerifyOutcome),
    Listing(Vec<ListingRow>),
}

#[derive(serde::Serialize)]
struct ListingRow {
    name: &'static str,
    kind: &'static str,
    status: Status,
    provenance: &'static str,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn pipeline_config(g: &Global, order: Option<usize>) -> Result<PipelineConfig> {
    let file = match &g.config {
        Some(p) => ConfigOverrides::read(p)?,
        None => ConfigOverrides::default(),
    };
    let flags = ConfigOverrides {
        restarts: g.restarts,
        max_iters: g.max_iters,
        shift: g.shift,
        seed: g.seed,
        tol: g.tol,
        order,
        ..Default::default()
    };
    file.merged(flags).apply(PipelineConfig::default())
}

fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    let out = match &cli.command {
        Command::ReduceBox { input } => {
            let inst = expect_bq4e(input)?;
            let (sys, layout) = match g.mode {
                Mode::Homogeneous => compile_homogeneous(&inst),
                Mode::Affine => compile_affine(&inst),
            };
            Output::Doc(Document::System(SystemDoc::from_system(
                &sys,
                Some(&layout),
            )))
        }
        Command::ReduceTensor { input, threshold } => {
            let hq = match Document::read(input)? {
                Document::System(d) => d.to_hqsf()?,
                other => return Err(wrong_kind(input, "system", &other)),
            };
            let data = build_quartic(&hq).map_err(HarnessError::stage("reduce-tensor"))?;
            Output::Doc(if *threshold {
                Document::Threshold(ThresholdDoc::from_instance(&tensorize(&data)))
            } else {
                Document::Quartic(QuarticDoc::from_data(&data))
            })
        }
        Command::LiftOrder { input, order } => {
            let data = expect_quartic(input)?;
            let lift = lift_order(&data, *order).map_err(HarnessError::stage("lift-order"))?;
            let inst = lift
                .threshold_instance()
                .map_err(HarnessError::stage("lift-order"))?;
            Output::Doc(Document::Threshold(ThresholdDoc::from_instance(&inst)))
        }
        Command::Maximize { input, multilinear } => {
            let cfg = pipeline_config(g, None)?.ascent;
            let doc = Document::read(input)?;
            let tensor = match &doc {
                Document::Quartic(d) => tensorize(&d.to_data()?).tensor().clone(),
                Document::Tensor(d) => d.to_tensor()?,
                Document::Threshold(d) => d.to_instance()?.tensor().clone(),
                other => return Err(wrong_kind(input, "quartic, tensor or threshold", other)),
            };
            let est = if *multilinear {
                maximize_multilinear(&tensor, &cfg)?.estimate
            } else if let Document::Quartic(d) = &doc {
                maximize_quartic(&d.to_data()?, &cfg)?
            } else {
                maximize_tensor(&tensor, &cfg)?
            };
            Output::Doc(Document::Estimate(EstimateDoc::from_estimate(&est)))
        }
        Command::Residual { input, x0_slice } => {
            let cfg = pipeline_config(g, None)?.ascent;
            let d = match Document::read(input)? {
                Document::System(d) => d,
                other => return Err(wrong_kind(input, "system", &other)),
            };
            let sys = d.to_system()?;
            let est = if *x0_slice {
                let layout = d.layout().ok_or_else(|| {
                    HarnessError::Input("the x0 slice needs a compiled system with a layout".into())
                })?;
                residual_min_restricted(&sys, &cfg, &[layout.x0()])?
            } else {
                residual_min(&sys, &cfg)?
            };
            Output::Doc(Document::Estimate(EstimateDoc::from_estimate(&est)))
        }
        Command::Verify { instance, witness } => {
            let doc = Document::read(instance)?;
            let w = match Document::read(witness)? {
                Document::Witness(w) => w,
                other => return Err(wrong_kind(witness, "witness", &other)),
            };
            Output::Verify(verify_witness(&doc, &w)?)
        }
        Command::Pipeline {
            input,
            library: name,
            witness,
            order,
        } => {
            if g.mode == Mode::Affine {
                return Err(HarnessError::Input(
                    "the pipeline runs on the homogeneous system only".into(),
                ));
            }
            let cfg = pipeline_config(g, *order)?;
            let report = match (input, name) {
                (_, Some(name)) => match find(name) {
                    Ok(inst) => run_pipeline(&inst, &cfg)?,
                    Err(_) => run_hqsf_pipeline(&find_hqsf(name)?, &cfg)?,
                },
                (Some(path), None) => pipeline_file(path, witness.as_deref(), &cfg)?,
                (None, None) => {
                    return Err(HarnessError::Input(
                        "give an input file or --library NAME".into(),
                    ))
                }
            };
            Output::Doc(Document::Report(report))
        }
        Command::Library {
            action: LibraryAction::List,
        } => {
            let mut rows: Vec<ListingRow> = library()
                .into_iter()
                .map(|i| ListingRow {
                    name: i.name,
                    kind: "bq4e",
                    status: i.status,
                    provenance: i.provenance,
                })
                .collect();
            rows.extend(hqsf_library().into_iter().map(|i| ListingRow {
                name: i.name,
                kind: "system",
                status: i.status,
                provenance: i.provenance,
            }));
            Output::Listing(rows)
        }
        Command::Library {
            action: LibraryAction::Write { dir },
        } => {
            write_library(dir)?;
            return Ok(());
        }
    };
    emit(g, &out)
}

fn pipeline_file(
    path: &Path,
    witness: Option<&Path>,
    cfg: &PipelineConfig,
) -> Result<PipelineReport> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let values = match witness {
        Some(w) => match Document::read(w)? {
            Document::Witness(w) => Some(w.values()?),
            other => return Err(wrong_kind(w, "witness", &other)),
        },
        None => None,
    };
    match Document::read(path)? {
        Document::Bq4e(d) => {
            let inst = d.to_instance()?;
            let xi = values.map(BoxWitness::new).transpose()?;
            run_bq4e(&name, &inst, xi.as_ref(), cfg)
        }
        Document::System(d) => run_hqsf(&name, &d.to_hqsf()?, values.as_deref(), cfg),
        other => Err(wrong_kind(path, "bq4e or system", &other)),
    }
}

fn write_library(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.into(),
        source,
    })?;
    for inst in library() {
        Document::Bq4e(Bq4eDoc::from_instance(&inst.bq4e))
            .write(&dir.join(format!("{}.json", inst.name)))?;
        if let Some(w) = &inst.witness {
            Document::Witness(WitnessDoc::exact(w.coords()))
                .write(&dir.join(format!("{}.witness.json", inst.name)))?;
        }
    }
    for inst in hqsf_library() {
        Document::System(SystemDoc::from_hqsf(&inst.instance))
            .write(&dir.join(format!("{}.json", inst.name)))?;
        if let Some(w) = &inst.witness {
            Document::Witness(WitnessDoc::exact(w))
                .write(&dir.join(format!("{}.witness.json", inst.name)))?;
        }
    }
    Ok(())
}

fn expect_bq4e(path: &Path) -> Result<spectral_threshold_core::reduce_box::Bq4eInstance> {
    match Document::read(path)? {
        Document::Bq4e(d) => d.to_instance(),
        other => Err(wrong_kind(path, "bq4e", &other)),
    }
}

fn expect_quartic(
    path: &Path,
) -> Result<spectral_threshold_core::reduce_tensor::QuarticCertificateData> {
    match Document::read(path)? {
        Document::Quartic(d) => d.to_data(),
        other => Err(wrong_kind(path, "quartic", &other)),
    }
}

fn wrong_kind(path: &Path, expected: &str, got: &Document) -> HarnessError {
    HarnessError::Input(format!(
        "{}: expected a {expected} document, found {}",
        path.display(),
        got.kind()
    ))
}

fn emit(g: &Global, out: &Output) -> Result<()> {
    let text = match (g.format, out) {
        (Format::Json, Output::Doc(d)) => d.to_json(),
        (Format::Json, Output::Verify(v)) => serde_json::to_string_pretty(v)?,
        (Format::Json, Output::Listing(rows)) => serde_json::to_string_pretty(rows)?,
        (Format::Text, _) => text_summary(out),
    };
    match &g.output {
        Some(path) => std::fs::write(path, text + "\n").map_err(|source| HarnessError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(HarnessError::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                }),
                _ => Ok(()),
            }
        }
    }
}

fn text_summary(out: &Output) -> String {
    match out {
        Output::Verify(VerifyOutcome::Accept) => "accept".into(),
        Output::Verify(VerifyOutcome::Reject { form_index, reason }) => match form_index {
            Some(k) => format!("reject (form {k}): {reason}"),
            None => format!("reject: {reason}"),
        },
        Output::Listing(rows) => rows
            .iter()
            .map(|r| {
                format!(
                    "{:<16} {:<7} {:<8} {}",
                    r.name,
                    r.kind,
                    format!("{:?}", r.status).to_lowercase(),
                    r.provenance
                )
            })
            .collect::<Vec<_>>()
            .join("\n"),
        Output::Doc(doc) => match doc {
            Document::Bq4e(d) => format!("bq4e: n = {}, {} terms", d.n, d.h.len()),
            Document::System(d) => format!(
                "system: N = {}, {} forms, {:?}",
                d.dimension,
                d.forms.len(),
                d.mode
            )
            .to_lowercase(),
            Document::Quartic(d) => format!(
                "quartic: N = {}, C = {}, B = {}, {} terms",
                d.dimension,
                d.c,
                d.b,
                d.p.len()
            ),
            Document::Tensor(d) => format!(
                "tensor: n = {}, d = {}, {} entries",
                d.n,
                d.d,
                d.entries.len()
            ),
            Document::Threshold(d) => {
                format!(
                    "threshold: n = {}, d = {}, B = {}, gamma^2 = {}, {} entries",
                    d.n,
                    d.d,
                    d.b,
                    d.gamma_sq,
                    d.entries.len()
                )
            }
            Document::Witness(d) => format!(
                "witness ({}): {}",
                if d.exact { "exact" } else { "inexact" },
                d.y.join(" ")
            ),
            Document::Estimate(d) => format!(
                "estimate (numerical): {:.12e}, converged = {}, restarts = {}, iterations = {}",
                d.value, d.converged, d.restarts_used, d.iterations
            ),
            Document::Report(r) => report_text(r),
        },
    }
}

fn report_text(r: &PipelineReport) -> String {
    let mut lines = vec![
        format!(
            "instance {}  N = {}  seed = {}",
            r.instance, r.dimension, r.seed
        ),
        format!("verdict  {:?} ({})", r.verdict, r.label),
    ];
    let m = &r.margins;
    lines.push(format!("B        {}", m.threshold));
    if let (Some(e), Some(gap)) = (m.max_estimate, m.max_margin) {
        lines.push(format!("max p    {e:.12}  margin {gap:.3e}"));
    }
    if let Some(res) = m.residual_min {
        lines.push(format!("min res  {res:.3e}"));
    }
    if let Some(l) = &m.lifted {
        let est = l
            .estimate
            .map(|e| format!("{e:.12}"))
            .unwrap_or_else(|| "-".into());
        lines.push(format!(
            "order {}  threshold {:.12}  estimate {}  certified {}",
            l.order, l.threshold, est, l.certified
        ));
    }
    if let Some(y) = &r.exact_witness {
        lines.push(format!("witness  {}", y.join(" ")));
    }
    lines.push(String::from("stage            seconds"));
    for s in &r.stages {
        lines.push(format!("{:<16} {:.4}", s.name, s.seconds));
    }
    lines.join("\n")
}
