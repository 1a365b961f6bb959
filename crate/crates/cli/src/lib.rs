// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Configuration-driven experiment runner.
//!
//! A run reads one JSON [`RunConfig`], validates it against the selected
//! experiment, and writes `<command>.json` and/or `<command>.csv` into the
//! output directory. Floats are printed as `{:.16e}` so identical inputs
//! give byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use sobolev_core::geometry::{GeometryError, GroupModel, ModelConfig, ModelKind};
use sobolev_core::harness::{
    acceptance, compare_induced, negative_sandwich, sandwich_report, spectral_gap,
    truncation_sweep, vector_factorization_residual, Ensemble, HarnessError, SandwichReport,
    DEFAULT_ENSEMBLE_SIZE, DEFAULT_SEED,
};
use sobolev_core::lie::{AlgebraConfig, LieAlgebra, LieError};
use sobolev_core::linalg::CVector;
use sobolev_core::representation::{NormKind, Representation, RepresentationConfig, RepresentationError};
use sobolev_core::sobolev::{
    InducedSettings, InducedSobolev, NormFamily, NormReport, Sobolev, SobolevError,
};
use sobolev_core::spectral::{
    derivative_jumps, holder_exponent, tail_decay_rate, Kernel, ResolventPower, SpectralError,
    DEFAULT_EPSILON,
};

#[derive(Debug, Parser)]
#[command(name = "sobolev", version, about = "Sobolev norm experiments on Lie group representations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration (optional for `report-all`).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the ensemble seed of the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Evaluate the standard, Laplace, negative and induced norms.
    Norms,
    /// Tabulate the kernel of (R²+Δ)^{-m} and its split diagnostics.
    Kernel,
    /// Vector factorization residuals over an ensemble.
    Factorize,
    /// Smallest singular value of dπ(R²+Δ) against the threshold R_E.
    Gap,
    /// Sandwich ratios between norm families.
    Compare,
    /// Run every acceptance check.
    ReportAll,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Norms => "norms",
            Command::Kernel => "kernel",
            Command::Factorize => "factorize",
            Command::Gap => "gap",
            Command::Compare => "compare",
            Command::ReportAll => "report-all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupBlock {
    #[serde(flatten)]
    pub model: ModelConfig,
    /// Optional explicit algebra; it must match the model's algebra.
    #[serde(default)]
    pub algebra: Option<AlgebraConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "R", default = "default_r")]
    pub r: f64,
    #[serde(default = "default_m")]
    pub m: u32,
    #[serde(default = "default_m")]
    pub k: u32,
    #[serde(default)]
    pub s: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_ensemble")]
    pub ensemble_size: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Truncations `N` for refinement sweeps of `torus_regular`.
    #[serde(default)]
    pub truncations: Option<Vec<usize>>,
    /// Explicit test vector as `[re, im]` pairs, used instead of the ensemble.
    #[serde(default)]
    pub vector: Option<Vec<[f64; 2]>>,
    /// Cutoff radius of the kernel split.
    #[serde(default = "default_split_epsilon")]
    pub split_epsilon: f64,
}

fn default_r() -> f64 {
    1.0
}
fn default_m() -> u32 {
    1
}
fn default_epsilon() -> f64 {
    0.5
}
fn default_ensemble() -> usize {
    DEFAULT_ENSEMBLE_SIZE
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_split_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub group: GroupBlock,
    #[serde(default)]
    pub representation: Option<RepresentationConfig>,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{command} needs --config")]
    MissingConfig { command: &'static str },
    #[error("invalid `{field}`: {message}")]
    Validation { field: &'static str, message: String },
    #[error("declared algebra does not match the {model} model's algebra")]
    AlgebraMismatch { model: String },
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Representation(#[from] RepresentationError),
    #[error(transparent)]
    Sobolev(#[from] SobolevError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse(_) => "parse",
            CliError::MissingConfig { .. } => "missing_config",
            CliError::Validation { .. } => "validation",
            CliError::AlgebraMismatch { .. } => "algebra_mismatch",
            CliError::Lie(LieError::Jacobi { .. }) => "jacobi",
            CliError::Lie(_) => "algebra",
            CliError::Geometry(_) => "geometry",
            CliError::Representation(RepresentationError::Bracket { .. }) => "bracket",
            CliError::Representation(_) => "representation",
            CliError::Sobolev(_) => "sobolev",
            CliError::Spectral(_) => "spectral",
            CliError::Harness(HarnessError::BelowThreshold { .. }) => "below_threshold",
            CliError::Harness(_) => "harness",
            CliError::Csv(_) => "csv",
        }
    }

    /// Machine-readable form printed on failure.
    pub fn to_json(&self) -> Value {
        let mut detail = json!({ "kind": self.kind(), "message": self.to_string() });
        match self {
            CliError::Lie(LieError::Jacobi { i, j, k, l, residual }) => {
                detail["triple"] = json!([i, j, k]);
                detail["component"] = json!(l);
                detail["residual"] = json!(residual);
            }
            CliError::Lie(LieError::Antisymmetry { i, j, k, residual }) => {
                detail["indices"] = json!([i, j, k]);
                detail["residual"] = json!(residual);
            }
            CliError::Validation { field, .. } => detail["field"] = json!(field),
            CliError::Harness(HarnessError::BelowThreshold { r, r_e }) => {
                detail["R"] = json!(r);
                detail["R_E"] = json!(r_e);
            }
            _ => {}
        }
        json!({ "error": detail })
    }
}

/// Files written by a run and the aligned-text summary for the terminal.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
    /// False when a report-all check failed.
    pub success: bool,
}

/// A finished experiment before serialization.
struct Artifact {
    json: Value,
    header: Vec<String>,
    rows: Vec<Vec<Value>>,
    success: bool,
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let config = match &cli.config {
        Some(path) => Some(load_config(path)?),
        None if cli.command == Command::ReportAll => None,
        None => {
            return Err(CliError::MissingConfig {
                command: cli.command.name(),
            })
        }
    };
    let format = cli
        .format
        .or(config.as_ref().and_then(|c| c.output.format))
        .unwrap_or_default();
    let out_dir = cli
        .out
        .clone()
        .or(config.as_ref().and_then(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."));
    let artifact = match config {
        Some(mut cfg) => {
            if let Some(seed) = cli.seed {
                cfg.experiment.seed = seed;
            }
            dispatch(cli.command, &cfg)?
        }
        None => report_all(),
    };
    let files = write_artifact(&artifact, cli.command.name(), &out_dir, format)?;
    Ok(Outcome {
        files,
        summary: text_table(&artifact),
        success: artifact.success,
    })
}

/// Runs one experiment on a parsed configuration without touching disk.
pub fn execute(command: Command, config: &RunConfig) -> Result<Value, CliError> {
    Ok(dispatch(command, config)?.json)
}

fn dispatch(command: Command, cfg: &RunConfig) -> Result<Artifact, CliError> {
    validate(command, cfg)?;
    let model = Arc::new(build_model(&cfg.group)?);
    match command {
        Command::Kernel => kernel(&model, &cfg.experiment),
        Command::ReportAll => Ok(report_all()),
        _ => {
            let block = cfg.representation.as_ref().ok_or(CliError::Validation {
                field: "representation",
                message: format!("`{}` needs a representation block", command.name()),
            })?;
            let rep = block.build(model.clone())?;
            let exp = &cfg.experiment;
            match command {
                Command::Norms => norms(&rep, exp),
                Command::Factorize => factorize(&rep, exp),
                Command::Gap => gap(&rep, exp),
                Command::Compare => compare(&rep, block, &model, exp),
                Command::Kernel | Command::ReportAll => unreachable!("handled above"),
            }
        }
    }
}

fn validate(command: Command, cfg: &RunConfig) -> Result<(), CliError> {
    let e = &cfg.experiment;
    let bad = |field, message: String| Err(CliError::Validation { field, message });
    if !(e.r > 0.0 && e.r.is_finite()) {
        return bad("R", format!("R must be a positive number (got {})", e.r));
    }
    if matches!(command, Command::Kernel | Command::Factorize) && e.m == 0 {
        return bad("m", "the kernel order m must be at least 1".into());
    }
    if !e.s.is_finite() {
        return bad("s", "s must be finite".into());
    }
    if command == Command::Compare && !(e.epsilon > 0.0) {
        return bad("epsilon", format!("ε must be positive (got {})", e.epsilon));
    }
    if command == Command::Kernel && !(e.split_epsilon > 0.0) {
        return bad("split_epsilon", "the split cutoff must be positive".into());
    }
    if let Some(t) = &e.truncations {
        if t.is_empty() || t.contains(&0) {
            return bad("truncations", "truncations must be a non-empty list of positive N".into());
        }
        if !matches!(cfg.representation, Some(RepresentationConfig::TorusRegular { .. })) {
            return bad("truncations", "truncation sweeps need a torus_regular representation".into());
        }
    }
    Ok(())
}

fn build_model(group: &GroupBlock) -> Result<GroupModel, CliError> {
    let model = group.model.build()?;
    if let Some(block) = &group.algebra {
        let declared = block.build()?;
        if !same_structure(&declared, model.algebra()) {
            return Err(CliError::AlgebraMismatch {
                model: format!("{:?}", model.kind()),
            });
        }
    }
    Ok(model)
}

fn same_structure(a: &LieAlgebra, b: &LieAlgebra) -> bool {
    let n = a.dim();
    n == b.dim()
        && (0..n).all(|i| {
            (0..n).all(|j| {
                (0..n).all(|k| (a.structure_constant(i, j, k) - b.structure_constant(i, j, k)).abs() < 1e-12)
            })
        })
}

fn test_vectors(rep: &Representation, exp: &ExperimentConfig) -> Result<Vec<CVector>, CliError> {
    match &exp.vector {
        Some(v) => {
            if v.len() != rep.dim() {
                return Err(CliError::Validation {
                    field: "vector",
                    message: format!("expected {} components, got {}", rep.dim(), v.len()),
                });
            }
            Ok(vec![CVector::from_iterator(
                v.len(),
                v.iter().map(|[re, im]| num_complex::Complex64::new(*re, *im)),
            )])
        }
        None => Ok(Ensemble::new(rep, exp.ensemble_size, exp.seed).vectors),
    }
}

fn norm_row(index: usize, r: &NormReport) -> Vec<Value> {
    vec![json!(index), json!(r.family), json!(r.order), json!(r.r), json!(r.value)]
}

fn norms(rep: &Representation, exp: &ExperimentConfig) -> Result<Artifact, CliError> {
    let vectors = test_vectors(rep, exp)?;
    let sob = Sobolev::new(rep);
    let induced = match rep.model().kind() {
        ModelKind::Su2 => None,
        _ => Some(InducedSobolev::new(rep, InducedSettings::default())?),
    };
    let dual_ok = matches!(rep.norm_kind(), NormKind::L2 | NormKind::Hermitian(_)) || exp.k == 0;
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        let mut reports = Vec::new();
        for j in 0..=exp.k {
            reports.push(NormReport {
                family: NormFamily::Standard,
                order: j as f64,
                r: None,
                value: sob.standard(v, j)?,
                diagnostics: Default::default(),
            });
        }
        reports.push(sob.laplace(v, exp.s, exp.r)?);
        if dual_ok {
            reports.push(sob.negative(v, exp.k)?);
        }
        if let Some(ind) = &induced {
            reports.push(ind.value(v, exp.s)?);
        }
        rows.extend(reports.iter().map(|r| norm_row(i, r)));
        entries.push(json!({ "vector": i, "norms": reports }));
    }
    Ok(Artifact {
        json: json!({ "command": "norms", "k": exp.k, "s": exp.s, "R": exp.r, "reports": entries }),
        header: ["vector", "family", "order", "R", "value"].map(String::from).to_vec(),
        rows,
        success: true,
    })
}

fn kernel(model: &Arc<GroupModel>, exp: &ExperimentConfig) -> Result<Artifact, CliError> {
    let k = Kernel::new(model.clone(), ResolventPower::new(exp.r, exp.m)?)?;
    let mut doc = k.to_json();
    let split = k.cgt_split(exp.split_epsilon)?;
    let mut diag = json!({ "epsilon": exp.split_epsilon });
    if 2 * exp.m as usize > model.dim() {
        let h = holder_exponent(&split)?;
        diag["holder_alpha"] = json!(h.alpha);
        diag["holder_saturated"] = json!(h.saturated);
        let jumps = derivative_jumps(&split, 1e-3);
        diag["first_derivative_jump"] = json!(jumps.first_jump());
        diag["second_derivative_jump"] = json!(jumps.second_jump());
    }
    if let Some(l) = model.half_width() {
        let window = (5.0 * exp.split_epsilon, 0.8 * l);
        if window.0 < window.1 {
            let fit = tail_decay_rate(model, split.tail(), window)?;
            diag["tail_decay_rate"] = json!(fit.rate);
            diag["tail_decay_window"] = json!([window.0, window.1]);
        }
    }
    doc["split"] = diag;
    let mut rows: Vec<(f64, f64)> = (0..model.node_count())
        .map(|q| (model.node_distance(q), k.values().values()[q].re))
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    rows.dedup();
    Ok(Artifact {
        json: json!({ "command": "kernel", "R": exp.r, "m": exp.m, "kernel": doc }),
        header: ["distance", "value"].map(String::from).to_vec(),
        rows: rows.into_iter().map(|(d, v)| vec![json!(d), json!(v)]).collect(),
        success: true,
    })
}

fn factorize(rep: &Representation, exp: &ExperimentConfig) -> Result<Artifact, CliError> {
    let vectors = test_vectors(rep, exp)?;
    let mut residuals = Vec::with_capacity(vectors.len());
    let mut first = None;
    for v in &vectors {
        let report = vector_factorization_residual(rep, v, exp.r, exp.m)?;
        residuals.push(report.residual);
        first.get_or_insert(report);
    }
    let report = first.ok_or(CliError::Validation {
        field: "ensemble_size",
        message: "no test vectors".into(),
    })?;
    let max = residuals.iter().copied().fold(0.0, f64::max);
    Ok(Artifact {
        json: json!({
            "command": "factorize",
            "R": report.r,
            "R_E": report.r_e,
            "m": report.m,
            "max_residual": max,
            "residuals": residuals,
        }),
        header: ["vector", "residual"].map(String::from).to_vec(),
        rows: residuals.iter().enumerate().map(|(i, r)| vec![json!(i), json!(r)]).collect(),
        success: true,
    })
}

fn gap(rep: &Representation, exp: &ExperimentConfig) -> Result<Artifact, CliError> {
    let g = spectral_gap(rep, exp.r)?;
    let value = serde_json::to_value(&g)?;
    let header: Vec<String> = ["R", "R_E", "c_pi", "c_g", "sigma_min", "invertible", "above_threshold"]
        .map(String::from)
        .to_vec();
    let row = header.iter().map(|h| value[h.as_str()].clone()).collect();
    Ok(Artifact {
        json: json!({ "command": "gap", "gap": value }),
        header,
        rows: vec![row],
        success: true,
    })
}

fn compare(
    rep: &Representation,
    block: &RepresentationConfig,
    model: &Arc<GroupModel>,
    exp: &ExperimentConfig,
) -> Result<Artifact, CliError> {
    let hermitian = matches!(rep.norm_kind(), NormKind::L2 | NormKind::Hermitian(_));
    let grid = model.kind() != ModelKind::Su2;
    let settings = InducedSettings::default();
    let mut reports: Vec<SandwichReport> = Vec::new();
    match (&exp.truncations, block) {
        (Some(sizes), RepresentationConfig::TorusRegular { .. }) => {
            let sweep = |f: &dyn Fn(&Representation, &Ensemble) -> Result<SandwichReport, HarnessError>| {
                truncation_sweep(model, sizes, exp.ensemble_size, exp.seed, f)
            };
            reports.extend(sweep(&|r, e| sandwich_report(r, exp.k, exp.r, e))?);
            reports.extend(sweep(&|r, e| compare_induced(r, exp.s, exp.epsilon, exp.r, e, settings))?);
            reports.extend(sweep(&|r, e| negative_sandwich(r, exp.k, exp.r, e))?);
        }
        _ => {
            let ens = Ensemble::new(rep, exp.ensemble_size, exp.seed);
            reports.push(sandwich_report(rep, exp.k, exp.r, &ens)?);
            if grid {
                reports.push(compare_induced(rep, exp.s, exp.epsilon, exp.r, &ens, settings)?);
            }
            if hermitian {
                reports.push(negative_sandwich(rep, exp.k, exp.r, &ens)?);
            }
        }
    }
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                json!(r.family),
                json!(r.order),
                json!(r.r),
                json!(r.truncation),
                json!(r.ensemble_size),
                json!(r.lower),
                json!(r.upper),
                json!(r.shift),
            ]
        })
        .collect();
    Ok(Artifact {
        json: json!({ "command": "compare", "reports": reports }),
        header: ["family", "order", "R", "truncation", "ensemble_size", "lower", "upper", "shift"]
            .map(String::from)
            .to_vec(),
        rows,
        success: true,
    })
}

fn report_all() -> Artifact {
    let results = acceptance::run_all();
    let success = results.iter().all(|r| r.passed);
    let rows = results
        .iter()
        .map(|r| vec![json!(r.id), json!(r.name), json!(r.passed), json!(r.seconds), json!(r.detail)])
        .collect();
    Artifact {
        json: json!({ "command": "report-all", "passed": success, "criteria": results }),
        header: ["id", "name", "passed", "seconds", "detail"].map(String::from).to_vec(),
        rows,
        success,
    }
}

/// JSON formatter writing every float with 17 significant digits.
struct FixedFloat;

impl serde_json::ser::Formatter for FixedFloat {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }
}

/// Compact JSON with fixed float formatting.
pub fn to_json_string(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloat);
    value.serialize(&mut ser).expect("JSON values serialize");
    String::from_utf8(out).expect("UTF-8 JSON")
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format!("{:.16e}", n.as_f64().expect("f64")),
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn write_artifact(
    artifact: &Artifact,
    name: &str,
    dir: &Path,
    format: Format,
) -> Result<Vec<PathBuf>, CliError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut files = Vec::new();
    if matches!(format, Format::Json | Format::Both) {
        let path = dir.join(format!("{name}.json"));
        let mut text = to_json_string(&artifact.json);
        text.push('\n');
        fs::write(&path, text).map_err(io(&path))?;
        files.push(path);
    }
    if matches!(format, Format::Csv | Format::Both) {
        let path = dir.join(format!("{name}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&artifact.header)?;
        for row in &artifact.rows {
            w.write_record(row.iter().map(cell))?;
        }
        w.flush().map_err(io(&path))?;
        files.push(path);
    }
    Ok(files)
}

fn text_table(artifact: &Artifact) -> String {
    let cells: Vec<Vec<String>> = artifact
        .rows
        .iter()
        .take(40)
        .map(|r| {
            r.iter()
                .map(|v| match v {
                    Value::Number(n) if n.is_f64() => format!("{:.6e}", n.as_f64().expect("f64")),
                    other => cell(other),
                })
                .collect()
        })
        .collect();
    let widths: Vec<usize> = (0..artifact.header.len())
        .map(|j| {
            cells
                .iter()
                .map(|r| r.get(j).map_or(0, |c| c.chars().count()))
                .chain([artifact.header[j].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |row: &[String]| {
        row.iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = vec![line(&artifact.header)];
    out.extend(cells.iter().map(|r| line(r)));
    if artifact.rows.len() > 40 {
        out.push(format!("… {} more rows", artifact.rows.len() - 40));
    }
    out.join("\n")
}
