//! Command implementations behind the `polysel` binary.
//!
//! Exit codes: 0 success, 1 I/O or internal failure, 2 malformed data,
//! 3 infeasible configuration, 4 size cap exceeded or unsupported request.

pub mod settings;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use polysel::data::{read_numeric_csv, Dataset};
use polysel::estimate::{model_average_predict, PosteriorSummary, PosteriorTable, TableEntry};
use polysel::marginal::{GPrior, ModelScorer};
use polysel::prior::{ModelPrior, PriorFamily, PriorSpec, Scheme};
use polysel::sampler::{self, KernelWeights, SamplerConfig};
use polysel::sim::{self, Allocation, SimDesign};
use polysel::space::{Heredity, Model, ModelCount, ModelSpace};
use polysel::term::{generate_full_surface, Term};
use polysel::Error;

use settings::Settings;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(3, message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Data(_) | Error::DataLine { .. } | Error::DimensionMismatch { .. } => 2,
            Error::CapExceeded { .. } | Error::NotQuadratic => 4,
            Error::CacheConflict { .. } => 1,
            _ => 3,
        };
        Self::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(1, e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::new(1, e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::new(1, e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "polysel",
    version,
    about = "Bayesian selection of polynomial regression models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the sampler on a CSV dataset and report the posterior.
    Select(Box<SelectArgs>),
    /// Prior probability of every model in an enumerable space.
    PriorTable(PriorTableArgs),
    /// Number of models in a space.
    Count(CountArgs),
    /// Predict new observations from a saved selection run.
    Predict(PredictArgs),
    /// Run a simulation experiment.
    Simulate(SimulateArgs),
    /// Graphviz rendering of one model.
    Dot(DotArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct SpaceArgs {
    /// Number of main effects.
    #[arg(long)]
    pub p: Option<usize>,
    /// Degree of the full polynomial surface.
    #[arg(long)]
    pub degree: Option<u32>,
    /// strong or weak.
    #[arg(long)]
    pub heredity: Option<String>,
    /// Terms always included, comma separated.
    #[arg(long)]
    pub base: Option<String>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct SelectArgs {
    /// Flat key=value file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub response: Option<String>,
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Prior family (EPP, HUP, HIP, HOP, HLP, HTP) or a label like HOP.Ch.
    #[arg(long)]
    pub prior: Option<String>,
    /// 11 for (1,1) or ch for (1,ch).
    #[arg(long)]
    pub scheme: Option<String>,
    /// Parent-count penalty for weak-heredity spaces.
    #[arg(long)]
    pub parent_penalty: bool,
    #[arg(long)]
    pub iterations: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Local, intermediate and global kernel weights.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// g of the g-prior; defaults to n.
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Center and scale the mains before expansion.
    #[arg(long)]
    pub standardize: bool,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Newline-delimited JSON trace of the chain.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Posterior table artifact for `predict`.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct PriorTableArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Comma-separated labels such as HIP.11,HOP.Ch; `all` for every family.
    #[arg(long)]
    pub priors: Option<String>,
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Default)]
pub enum CountMethod {
    #[default]
    Auto,
    Closed,
    Enumerate,
}

#[derive(Debug, Clone, Args, Default)]
pub struct CountArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, value_enum, default_value_t = CountMethod::Auto)]
    pub method: CountMethod,
    #[arg(long, default_value_t = 100_000_000)]
    pub cap: u64,
}

#[derive(Debug, Clone, Args, Default)]
pub struct PredictArgs {
    /// Artifact written by `select --table`.
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long)]
    pub newdata: PathBuf,
    /// Number of top models averaged.
    #[arg(long, default_value_t = 1)]
    pub top_k: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct SimulateArgs {
    /// Flat key=value design description.
    #[arg(long)]
    pub design: Option<PathBuf>,
    /// selection, tvd, theorem1 or theorem2.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub iterations: Option<u64>,
    /// Per-replication results; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Median summary; stderr when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct DotArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Included terms, comma separated.
    #[arg(long, default_value = "")]
    pub model: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs one command, writing data to `stdout` and diagnostics to `stderr`.
pub fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Select(a) => cmd_select(&a, stdout),
        Command::PriorTable(a) => {
            let t = cmd_prior_table(&a)?;
            with_output(a.out.as_deref(), stdout, |w| write_prior_table(&t, w))
        }
        Command::Count(a) => {
            let c = cmd_count(&a)?;
            writeln!(stdout, "{c}")?;
            Ok(())
        }
        Command::Predict(a) => cmd_predict(&a, stdout, stderr),
        Command::Simulate(a) => cmd_simulate(&a, stdout, stderr),
        Command::Dot(a) => {
            let s = cmd_dot(&a)?;
            with_output(a.out.as_deref(), stdout, |w| Ok(w.write_all(s.as_bytes())?))
        }
    }
}

fn with_output<F>(path: Option<&Path>, stdout: &mut dyn Write, f: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> CliResult<()>,
{
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(|e| CliError::new(1, format!("{}: {e}", p.display())))?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

/// Resolved space description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceConfig {
    pub p: usize,
    pub degree: u32,
    pub heredity: String,
    pub base: Vec<String>,
}

impl SpaceConfig {
    fn resolve(args: &SpaceArgs, settings: &Settings, p: Option<usize>) -> CliResult<Self> {
        let p = match p {
            Some(p) => p,
            None => args
                .p
                .or(settings.get("p")?)
                .ok_or_else(|| CliError::config("--p is required"))?,
        };
        let degree = args.degree.or(settings.get("degree")?).unwrap_or(2);
        let heredity = args
            .heredity
            .clone()
            .or(settings.get("heredity")?)
            .unwrap_or_else(|| "strong".into());
        let base = args
            .base
            .clone()
            .or(settings.get("base")?)
            .unwrap_or_else(|| "1".into());
        Ok(Self {
            p,
            degree,
            heredity,
            base: split_list(&base),
        })
    }

    pub fn build(&self) -> CliResult<ModelSpace> {
        if self.degree == 0 {
            return Err(CliError::config("degree must be at least 1"));
        }
        let heredity: Heredity = self.heredity.parse()?;
        let full = generate_full_surface(self.p, self.degree)?;
        let base = self
            .base
            .iter()
            .map(|s| Term::parse(s, self.p))
            .collect::<polysel::Result<Vec<_>>>()?;
        Ok(ModelSpace::new(base, full, heredity)?)
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_prior(prior: Option<&str>, scheme: Option<&str>, penalty: bool) -> CliResult<PriorSpec> {
    let prior = prior.unwrap_or("HOP");
    let mut spec = if prior.contains('.') {
        if scheme.is_some() {
            return Err(CliError::config(
                "give the scheme either in the prior label or with --scheme",
            ));
        }
        prior.parse::<PriorSpec>()?
    } else {
        let family: PriorFamily = prior.parse()?;
        let scheme: Scheme = scheme.unwrap_or("ch").parse()?;
        PriorSpec::new(family, scheme)
    };
    spec.whm_parent_penalty |= penalty;
    Ok(spec)
}

fn model_json(space: &ModelSpace, m: &Model) -> Value {
    json!(space.model_names(m))
}

/// Stored form of a selection run, enough to rebuild the scorer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableArtifact {
    pub version: String,
    pub space: SpaceConfig,
    pub response: String,
    pub names: Vec<String>,
    pub standardize: bool,
    pub g: Option<f64>,
    pub prior: String,
    pub seed: u64,
    pub iterations: u64,
    pub y: Vec<f64>,
    /// Row-major raw mains.
    pub mains: Vec<Vec<f64>>,
    pub entries: Vec<ArtifactEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactEntry {
    /// Selectable terms of the model.
    pub model: Vec<String>,
    pub log_marginal: f64,
    pub log_prior: f64,
    pub visits: u64,
}

impl TableArtifact {
    pub fn dataset(&self) -> CliResult<Dataset> {
        let n = self.y.len();
        let p = self.names.len();
        if self.mains.len() != n || self.mains.iter().any(|r| r.len() != p) {
            return Err(CliError::new(2, "table artifact: predictor matrix has the wrong shape"));
        }
        let mains = DMatrix::from_fn(n, p, |i, j| self.mains[i][j]);
        let d = Dataset::with_names(self.y.clone(), mains, self.names.clone())?;
        Ok(if self.standardize { d.standardized() } else { d })
    }

    pub fn table(&self, space: &ModelSpace) -> CliResult<PosteriorTable> {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let terms = e
                    .model
                    .iter()
                    .map(|s| Term::parse(s, space.p()))
                    .collect::<polysel::Result<Vec<_>>>()?;
                Ok((
                    space.model_from_terms(&terms)?,
                    TableEntry {
                        log_marginal: e.log_marginal,
                        log_prior: e.log_prior,
                        visits: e.visits,
                    },
                ))
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(PosteriorTable::from_entries(entries, self.iterations))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let f = File::open(path).map_err(|e| CliError::new(2, format!("{}: {e}", path.display())))?;
        serde_json::from_reader(std::io::BufReader::new(f))
            .map_err(|e| CliError::new(2, format!("{}: {e}", path.display())))
    }
}

pub fn cmd_select(args: &SelectArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let settings = match &args.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    let data: PathBuf = args
        .data
        .clone()
        .or(settings.get("data")?)
        .ok_or_else(|| CliError::config("--data is required"))?;
    let response: String = args
        .response
        .clone()
        .or(settings.get("response")?)
        .ok_or_else(|| CliError::config("--response is required"))?;
    let standardize = args.standardize || settings.get::<bool>("standardize")?.unwrap_or(false);
    let raw = Dataset::from_csv_path(&data, &response)?;
    let dataset = if standardize { raw.standardized() } else { raw.clone() };
    let space_cfg = SpaceConfig::resolve(&args.space, &settings, Some(dataset.p()))?;
    let space = space_cfg.build()?;

    let prior_name: Option<String> = args.prior.clone().or(settings.get("prior")?);
    // A prior given on the command line replaces the file's prior and scheme.
    let scheme: Option<String> = match args.prior {
        Some(_) => args.scheme.clone(),
        None => args.scheme.clone().or(settings.get("scheme")?),
    };
    let penalty = args.parent_penalty || settings.get::<bool>("parent_penalty")?.unwrap_or(false);
    let spec = parse_prior(prior_name.as_deref(), scheme.as_deref(), penalty)?;
    let prior = ModelPrior::new(&space, spec)?;

    let g: Option<f64> = args.g.or(settings.get("g")?);
    let evaluator = match g {
        Some(g) => GPrior::with_g(g)?,
        None => GPrior::unit_information(),
    };
    let scorer = ModelScorer::new(&dataset, &space, evaluator)?;

    let mut config = SamplerConfig::new(
        args.iterations.or(settings.get("iterations")?).unwrap_or(10_000),
        args.seed.or(settings.get("seed")?).unwrap_or(1),
    );
    if let Some(w) = args.weights.clone().or(settings.get("weights")?) {
        config.weights = w.parse::<KernelWeights>()?;
    }
    if let Some(l) = args.lambda.or(settings.get("lambda")?) {
        config.lambda = l;
    }
    let trace_path: Option<PathBuf> = args.trace.clone().or(settings.get("trace")?);
    config.keep_trace = trace_path.is_some();
    let top_k = args.top_k.or(settings.get("top_k")?).unwrap_or(10);

    let run = sampler::run(&scorer, &prior, &config)?;
    let summary = PosteriorSummary::new(&run.table, &space, top_k, None)?;

    let report = json!({
        "hpm": model_json(&space, &summary.hpm),
        "top_k": summary.top_k.iter().map(|r| json!({
            "model": model_json(&space, &r.model),
            "log_post": r.log_post,
            "prob": r.prob,
        })).collect::<Vec<_>>(),
        "inclusion": summary.inclusion.iter()
            .map(|(t, p)| (t.to_string(), json!(p)))
            .collect::<serde_json::Map<_, _>>(),
        "diagnostics": {
            "tvd_renorm_vs_freq": summary.tvd_renorm_vs_freq(),
            "acceptance_rate": run.acceptance_rate(),
            "n_evaluated": run.table.len(),
        },
        "metadata": {
            "version": VERSION,
            "data": data.display().to_string(),
            "response": response,
            "n": dataset.n(),
            "variables": space_vars(&dataset),
            "degree": space_cfg.degree,
            "heredity": space.heredity().to_string(),
            "base": space_cfg.base,
            "models_nodes": space.node_count(),
            "prior": spec.label(),
            "evaluator": scorer.evaluator().describe(),
            "standardize": standardize,
            "iterations": config.iterations,
            "seed": config.seed,
            "weights": [config.weights.local, config.weights.intermediate, config.weights.global],
            "lambda": config.lambda,
        },
    });
    let out: Option<PathBuf> = args.out.clone().or(settings.get("out")?);
    with_output(out.as_deref(), stdout, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)?;
        Ok(())
    })?;

    if let Some(path) = trace_path {
        let mut w = BufWriter::new(File::create(&path)?);
        for r in &run.trace {
            let line = json!({
                "iter": r.iter,
                "model": r.model.key_string(),
                "kernel": r.kernel.to_string(),
                "accepted": r.accepted,
                "log_post": r.log_post,
            });
            serde_json::to_writer(&mut w, &line)?;
            writeln!(w)?;
        }
        w.flush()?;
    }

    if let Some(path) = args.table.clone().or(settings.get("table")?) {
        let artifact = TableArtifact {
            version: VERSION.into(),
            space: space_cfg.clone(),
            response,
            names: raw.names().to_vec(),
            standardize,
            g,
            prior: spec.label(),
            seed: config.seed,
            iterations: run.table.iterations(),
            y: raw.y().to_vec(),
            mains: raw.mains().row_iter().map(|r| r.iter().copied().collect()).collect(),
            entries: run
                .table
                .iter()
                .map(|(m, e)| ArtifactEntry {
                    model: space
                        .model_terms(m)
                        .iter()
                        .filter(|t| space.node_index(t).is_some())
                        .map(Term::to_string)
                        .collect(),
                    log_marginal: e.log_marginal,
                    log_prior: e.log_prior,
                    visits: e.visits,
                })
                .collect(),
        };
        let w = BufWriter::new(File::create(&path)?);
        serde_json::to_writer(w, &artifact)?;
    }
    Ok(())
}

fn space_vars(d: &Dataset) -> Value {
    d.names()
        .iter()
        .enumerate()
        .map(|(j, n)| (format!("x{}", j + 1), json!(n)))
        .collect::<serde_json::Map<_, _>>()
        .into()
}

/// Rows of models with one probability per requested prior.
#[derive(Debug, Clone)]
pub struct PriorTable {
    pub labels: Vec<String>,
    pub rows: Vec<(Vec<String>, Vec<f64>)>,
}

/// The eight columns of the classic two-scheme comparison.
pub fn default_prior_columns() -> Vec<PriorSpec> {
    let mut v = Vec::new();
    for f in [PriorFamily::Hip, PriorFamily::Hop, PriorFamily::Hup, PriorFamily::Hlp] {
        for s in [Scheme::AllOnes, Scheme::ChildPenalty] {
            v.push(PriorSpec::new(f, s));
        }
    }
    v
}

pub fn cmd_prior_table(args: &PriorTableArgs) -> CliResult<PriorTable> {
    let space = SpaceConfig::resolve(&args.space, &Settings::default(), None)?.build()?;
    let specs: Vec<PriorSpec> = match args.priors.as_deref() {
        None => default_prior_columns(),
        Some(s) if s.eq_ignore_ascii_case("all") => {
            let mut v = vec![PriorSpec::new(PriorFamily::Epp, Scheme::AllOnes)];
            for f in &PriorFamily::ALL[1..] {
                v.push(PriorSpec::new(*f, Scheme::AllOnes));
                v.push(PriorSpec::new(*f, Scheme::ChildPenalty));
            }
            v
        }
        Some(s) => split_list(s)
            .iter()
            .map(|l| l.parse())
            .collect::<polysel::Result<_>>()?,
    };
    let mut models = space.enumerate(args.cap)?;
    models.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter())));
    let priors = specs
        .iter()
        .map(|s| ModelPrior::new(&space, *s))
        .collect::<polysel::Result<Vec<_>>>()?;
    let rows = models
        .iter()
        .map(|m| {
            (
                space.model_names(m),
                priors.iter().map(|p| p.log_prior_unchecked(m).exp()).collect(),
            )
        })
        .collect();
    Ok(PriorTable {
        labels: specs.iter().map(PriorSpec::label).collect(),
        rows,
    })
}

/// `v` to 12 significant digits, trailing zeros dropped.
pub fn format_sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-6..=12).contains(&mag) {
        return format!("{v:.11e}");
    }
    let decimals = (11 - mag).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn write_prior_table(t: &PriorTable, w: &mut dyn Write) -> CliResult<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["model".to_string()];
    header.extend(t.labels.iter().cloned());
    wr.write_record(&header)?;
    for (names, probs) in &t.rows {
        let mut rec = vec![names.join(" + ")];
        rec.extend(probs.iter().map(|p| format_sig12(*p)));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn cmd_count(args: &CountArgs) -> CliResult<String> {
    let space = SpaceConfig::resolve(&args.space, &Settings::default(), None)?.build()?;
    let closed = || -> CliResult<String> {
        space.closed_form_count().map(|c| c.to_string()).map_err(|_| {
            CliError::new(
                4,
                "closed-form counts cover full quadratic surfaces over an intercept-only base",
            )
        })
    };
    let enumerate = || -> CliResult<String> {
        match space.count_models(args.cap) {
            ModelCount::Exact(n) => Ok(n.to_string()),
            ModelCount::AtLeast(n) => Err(CliError::new(
                4,
                format!("more than {n} models; no closed form for this space and enumeration stopped at the cap"),
            )),
        }
    };
    match args.method {
        CountMethod::Closed => closed(),
        CountMethod::Enumerate => enumerate(),
        CountMethod::Auto => {
            if space.is_full_quadratic() {
                closed()
            } else {
                enumerate()
            }
        }
    }
}

pub fn cmd_dot(args: &DotArgs) -> CliResult<String> {
    let space = SpaceConfig::resolve(&args.space, &Settings::default(), None)?.build()?;
    let m = space.parse_model(&args.model)?;
    Ok(space.export_dot(&m))
}

/// Predictions and, when the response is present, the PRMSE.
#[derive(Debug, Clone)]
pub struct Predictions {
    pub yhat: Vec<f64>,
    pub y: Option<Vec<f64>>,
    pub prmse: Option<f64>,
}

pub fn predict_from_artifact(artifact: &TableArtifact, newdata: &Path, top_k: usize) -> CliResult<Predictions> {
    let f = File::open(newdata).map_err(|e| CliError::new(2, format!("{}: {e}", newdata.display())))?;
    let nt = read_numeric_csv(f)?;
    let cols: Vec<usize> = artifact
        .names
        .iter()
        .map(|name| {
            nt.header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| CliError::new(2, format!("new data lacks predictor column {name:?}")))
        })
        .collect::<CliResult<_>>()?;
    let n = nt.rows.len();
    let raw = DMatrix::from_fn(n, cols.len(), |i, j| nt.rows[i][cols[j]]);
    let y = nt
        .header
        .iter()
        .position(|h| *h == artifact.response)
        .map(|c| nt.rows.iter().map(|r| r[c]).collect::<Vec<f64>>());

    let space = artifact.space.build()?;
    let dataset = artifact.dataset()?;
    let evaluator = match artifact.g {
        Some(g) => GPrior::with_g(g)?,
        None => GPrior::unit_information(),
    };
    let scorer = ModelScorer::new(&dataset, &space, evaluator)?;
    let table = artifact.table(&space)?;
    let mains = dataset.transform_mains(&raw)?;
    let yhat = model_average_predict(&table, &scorer, &mains, top_k)?;
    let prmse = y
        .as_ref()
        .map(|y| (y.iter().zip(&yhat).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n as f64).sqrt());
    Ok(Predictions { yhat, y, prmse })
}

pub fn cmd_predict(args: &PredictArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    if args.top_k == 0 {
        return Err(CliError::config("--top-k must be at least 1"));
    }
    let artifact = TableArtifact::load(&args.table)?;
    let pred = predict_from_artifact(&artifact, &args.newdata, args.top_k)?;
    with_output(args.out.as_deref(), stdout, |w| {
        let mut wr = csv::Writer::from_writer(w);
        match &pred.y {
            Some(y) => {
                wr.write_record([artifact.response.as_str(), "prediction"])?;
                for (a, b) in y.iter().zip(&pred.yhat) {
                    wr.write_record([a.to_string(), b.to_string()])?;
                }
            }
            None => {
                wr.write_record(["prediction"])?;
                for b in &pred.yhat {
                    wr.write_record([b.to_string()])?;
                }
            }
        }
        wr.flush()?;
        Ok(())
    })?;
    if let Some(e) = pred.prmse {
        writeln!(stderr, "prmse (top {}): {e}", args.top_k)?;
    }
    Ok(())
}

/// Experiment description for `simulate`.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub kind: String,
    pub space: SpaceConfig,
    pub ns: Vec<usize>,
    pub snrs: Vec<f64>,
    pub allocation: Allocation,
    pub true_terms: Vec<String>,
    pub priors: Vec<PriorSpec>,
    pub iterations: u64,
    pub weights: KernelWeights,
    pub lambda: f64,
    pub replications: usize,
    pub seed: u64,
    pub cap: u64,
}

impl Experiment {
    pub fn preset(name: &str) -> CliResult<Self> {
        let quad5 = SpaceConfig {
            p: 5,
            degree: 2,
            heredity: "strong".into(),
            base: vec!["1".into()],
        };
        let label = |s: &str| s.parse::<PriorSpec>().expect("preset labels parse");
        let mut e = Experiment {
            kind: name.to_ascii_lowercase(),
            space: quad5,
            ns: vec![500],
            snrs: vec![1.0],
            allocation: Allocation::Equal,
            true_terms: sim::selection_preset_terms().iter().map(Term::to_string).collect(),
            priors: vec![label("HOP.Ch"), label("HIP.Ch"), label("HUP.Ch")],
            iterations: 10_000,
            weights: KernelWeights::default(),
            lambda: 0.5,
            replications: 20,
            seed: 2024,
            cap: 1_000_000,
        };
        match e.kind.as_str() {
            "selection" => {}
            "tvd" => {
                e.ns = vec![30, 100, 200];
                e.priors = vec![label("HOP.Ch")];
            }
            "theorem1" => {
                e.space.p = 3;
                e.ns = vec![100, 500, 2500, 12500];
                e.true_terms = sim::concentration_preset_terms().iter().map(Term::to_string).collect();
                e.priors = vec![label("HIP.11")];
            }
            "theorem2" => {
                e.space = SpaceConfig {
                    p: 2,
                    degree: 2,
                    heredity: "weak".into(),
                    base: vec!["1".into()],
                };
                e.ns = vec![10_000];
                e.true_terms = vec!["x1*x2".into()];
                e.priors = vec![label("HIP.11")];
            }
            other => return Err(CliError::config(format!("unknown preset {other:?}"))),
        }
        Ok(e)
    }

    /// Starts from the preset named by `experiment` (default `selection`)
    /// and applies every other key.
    pub fn from_settings(s: &Settings) -> CliResult<Self> {
        let kind: String = s.get("experiment")?.unwrap_or_else(|| "selection".into());
        let mut e = Self::preset(&kind)?;
        if let Some(v) = s.get("p")? {
            e.space.p = v;
        }
        if let Some(v) = s.get("degree")? {
            e.space.degree = v;
        }
        if let Some(v) = s.get("heredity")? {
            e.space.heredity = v;
        }
        if let Some(v) = s.get::<String>("base")? {
            e.space.base = split_list(&v);
        }
        if let Some(v) = s.get::<String>("n")? {
            e.ns = parse_list(&v)?;
        }
        if let Some(v) = s.get::<String>("snr")? {
            e.snrs = parse_list(&v)?;
        }
        if let Some(v) = s.get::<String>("allocation")? {
            e.allocation = v.parse()?;
        }
        if let Some(v) = s.get::<String>("true_model")? {
            e.true_terms = split_list(&v);
        }
        if let Some(v) = s.get::<String>("priors")?.or(s.get::<String>("prior")?) {
            e.priors = split_list(&v)
                .iter()
                .map(|l| l.parse())
                .collect::<polysel::Result<_>>()?;
        }
        if let Some(v) = s.get("iterations")? {
            e.iterations = v;
        }
        if let Some(v) = s.get::<String>("weights")? {
            e.weights = v.parse()?;
        }
        if let Some(v) = s.get("lambda")? {
            e.lambda = v;
        }
        if let Some(v) = s.get("replications")? {
            e.replications = v;
        }
        if let Some(v) = s.get("seed")? {
            e.seed = v;
        }
        if let Some(v) = s.get("cap")? {
            e.cap = v;
        }
        Ok(e)
    }

    fn validate(&self) -> CliResult<()> {
        if self.replications == 0 {
            return Err(CliError::config("replications must be at least 1"));
        }
        if self.ns.is_empty() || self.snrs.is_empty() || self.priors.is_empty() {
            return Err(CliError::config("n, snr and priors need at least one value each"));
        }
        Ok(())
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> CliResult<Vec<T>> {
    split_list(s)
        .iter()
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| CliError::config(format!("cannot parse {v:?} in {s:?}")))
        })
        .collect()
}

/// Results of a simulation: a header and rows for CSV, plus medians.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary_header: Vec<String>,
    pub summary: Vec<Vec<String>>,
}

pub fn run_experiment(e: &Experiment) -> CliResult<SimulationOutput> {
    e.validate()?;
    let space = e.space.build()?;
    let true_terms = e
        .true_terms
        .iter()
        .map(|s| Term::parse(s, e.space.p))
        .collect::<polysel::Result<Vec<_>>>()?;
    let mut sampler = SamplerConfig::new(e.iterations, e.seed);
    sampler.weights = e.weights;
    sampler.lambda = e.lambda;
    sampler.validate()?;
    let head = |cols: &[&str]| cols.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let f = |v: f64| v.to_string();
    let header;
    let summary_header;
    match e.kind.as_str() {
        "selection" => {
            header = head(&[
                "rep",
                "n",
                "snr",
                "allocation",
                "prior",
                "tp_rate",
                "fp_rate",
                "true_model_prob",
                "true_model_rank",
                "found",
            ]);
            summary_header = head(&[
                "n",
                "snr",
                "prior",
                "median_tp_rate",
                "median_fp_rate",
                "median_true_model_prob",
                "not_found",
            ]);
            for &n in &e.ns {
                for &snr in &e.snrs {
                    let design = SimDesign {
                        n,
                        snr,
                        allocation: e.allocation,
                        true_terms: true_terms.clone(),
                    };
                    let res = sim::selection_experiment(&space, &design, &e.priors, &sampler, e.replications, e.seed)?;
                    for r in &res {
                        rows.push(vec![
                            r.rep.to_string(),
                            n.to_string(),
                            f(snr),
                            e.allocation.to_string(),
                            r.prior.clone(),
                            f(r.score.tp_rate),
                            f(r.score.fp_rate),
                            f(r.score.true_model_prob),
                            r.score.true_model_rank.map_or(String::new(), |k| k.to_string()),
                            r.score.found.to_string(),
                        ]);
                    }
                    for spec in &e.priors {
                        let label = spec.label();
                        let mine: Vec<_> = res.iter().filter(|r| r.prior == label).collect();
                        let col = |g: &dyn Fn(&sim::SelectionRow) -> f64| {
                            sim::median(&mine.iter().map(|r| g(r)).collect::<Vec<_>>())
                        };
                        summary.push(vec![
                            n.to_string(),
                            f(snr),
                            label.clone(),
                            f(col(&|r| r.score.tp_rate)),
                            f(col(&|r| r.score.fp_rate)),
                            f(col(&|r| r.score.true_model_prob)),
                            mine.iter().filter(|r| !r.score.found).count().to_string(),
                        ]);
                    }
                }
            }
        }
        "tvd" => {
            header = head(&[
                "rep",
                "n",
                "snr",
                "prior",
                "tvd_renormalized",
                "tvd_frequency",
                "n_evaluated",
            ]);
            summary_header = head(&["n", "snr", "prior", "median_tvd_renormalized", "median_tvd_frequency"]);
            for &n in &e.ns {
                for &snr in &e.snrs {
                    for spec in &e.priors {
                        let design = SimDesign {
                            n,
                            snr,
                            allocation: e.allocation,
                            true_terms: true_terms.clone(),
                        };
                        let res = sim::tvd_experiment(&space, &design, *spec, &sampler, e.replications, e.seed, e.cap)?;
                        for r in &res {
                            rows.push(vec![
                                r.rep.to_string(),
                                n.to_string(),
                                f(snr),
                                spec.label(),
                                f(r.tvd_renormalized),
                                f(r.tvd_frequency),
                                r.n_evaluated.to_string(),
                            ]);
                        }
                        let a: Vec<f64> = res.iter().map(|r| r.tvd_renormalized).collect();
                        let b: Vec<f64> = res.iter().map(|r| r.tvd_frequency).collect();
                        summary.push(vec![
                            n.to_string(),
                            f(snr),
                            spec.label(),
                            f(sim::median(&a)),
                            f(sim::median(&b)),
                        ]);
                    }
                }
            }
        }
        "theorem1" => {
            header = head(&["rep", "n", "snr", "prior", "closure_prob"]);
            summary_header = head(&["n", "snr", "prior", "median_closure_prob"]);
            for &snr in &e.snrs {
                for spec in &e.priors {
                    let design = SimDesign {
                        n: 0,
                        snr,
                        allocation: e.allocation,
                        true_terms: true_terms.clone(),
                    };
                    let res = sim::theorem1_experiment(&space, &design, &e.ns, *spec, e.replications, e.seed, e.cap)?;
                    for r in &res {
                        rows.push(vec![
                            r.rep.to_string(),
                            r.n.to_string(),
                            f(snr),
                            spec.label(),
                            f(r.prob),
                        ]);
                    }
                    for &n in &e.ns {
                        let v: Vec<f64> = res.iter().filter(|r| r.n == n).map(|r| r.prob).collect();
                        summary.push(vec![n.to_string(), f(snr), spec.label(), f(sim::median(&v))]);
                    }
                }
            }
        }
        "theorem2" => {
            header = head(&[
                "rep",
                "n",
                "snr",
                "prior",
                "mass_1",
                "mass_2",
                "combined",
                "share_1",
                "strong_mass",
            ]);
            summary_header = head(&[
                "n",
                "snr",
                "prior",
                "median_combined",
                "sd_share_1",
                "median_strong_mass",
            ]);
            for &n in &e.ns {
                for &snr in &e.snrs {
                    for spec in &e.priors {
                        let res = sim::theorem2_experiment(n, snr, *spec, e.replications, e.seed)?;
                        for r in &res {
                            rows.push(vec![
                                r.rep.to_string(),
                                n.to_string(),
                                f(snr),
                                spec.label(),
                                f(r.mass_1),
                                f(r.mass_2),
                                f(r.combined),
                                f(r.share_1),
                                f(r.strong_mass),
                            ]);
                        }
                        let comb: Vec<f64> = res.iter().map(|r| r.combined).collect();
                        let share: Vec<f64> = res.iter().map(|r| r.share_1).collect();
                        let strong: Vec<f64> = res.iter().map(|r| r.strong_mass).collect();
                        summary.push(vec![
                            n.to_string(),
                            f(snr),
                            spec.label(),
                            f(sim::median(&comb)),
                            f(sample_sd(&share)),
                            f(sim::median(&strong)),
                        ]);
                    }
                }
            }
        }
        other => return Err(CliError::config(format!("unknown experiment {other:?}"))),
    }
    Ok(SimulationOutput {
        header,
        rows,
        summary_header,
        summary,
    })
}

/// Sample standard deviation with the `n − 1` divisor.
pub fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn write_csv(w: &mut dyn Write, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header)?;
    for r in rows {
        wr.write_record(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let mut e = match (&args.design, &args.preset) {
        (Some(p), _) => Experiment::from_settings(&Settings::load(p)?)?,
        (None, Some(name)) => Experiment::preset(name)?,
        (None, None) => return Err(CliError::config("give --design or --preset")),
    };
    if let Some(r) = args.replications {
        e.replications = r;
    }
    if let Some(s) = args.seed {
        e.seed = s;
    }
    if let Some(i) = args.iterations {
        e.iterations = i;
    }
    let out = run_experiment(&e)?;
    writeln!(
        stderr,
        "# polysel {VERSION} experiment={} seed={} replications={} iterations={}",
        e.kind, e.seed, e.replications, e.iterations
    )?;
    with_output(args.out.as_deref(), stdout, |w| write_csv(w, &out.header, &out.rows))?;
    match &args.summary {
        Some(p) => with_output(Some(p), stdout, |w| write_csv(w, &out.summary_header, &out.summary)),
        None => write_csv(stderr, &out.summary_header, &out.summary),
    }
}
