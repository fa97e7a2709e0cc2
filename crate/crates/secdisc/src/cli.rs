//! The `secdisc` command line.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use secdisc_core::baseline::KeywordBaseline;
use secdisc_core::classifiers::fit;
use secdisc_core::eval::{
    cross_validate, evaluate_predictions, evaluate_unseen, render_report, ConfusionMatrix, CvOutcome, FoldLog,
    FoldModel, FoldPlan, ReportFormat, Rounding, SpecModel,
};
use secdisc_core::preprocess::preprocess;
use secdisc_core::{Dataset, EmbeddingTable, FeatureScheme, MetricsRow, PreprocessConfig, TokenList};
use serde::Serialize;

use crate::config::RunConfig;
use crate::corpus_io::{self, ParagraphFile};
use crate::ingest::{self, github, stackexchange, Credentials, IssueState, SourceQuery};
use crate::model_io::{self, ModelArtifact};
use crate::predictions;
use crate::{atomic_write, resources};

#[derive(Debug, Parser)]
#[command(name = "secdisc", version, about = "Detect security discussions in developer conversations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fetch discussions (local dump or GitHub API) and write unlabeled paragraphs.
    Ingest(IngestArgs),
    /// Write the token list of every paragraph.
    Preprocess(PreprocessArgs),
    /// Fit one model on a labeled dataset.
    Train(TrainArgs),
    /// Label paragraphs with a trained model.
    Predict(PredictArgs),
    /// K-fold cross-validation of one or more models.
    Cv(CvArgs),
    /// Score a trained model on a labeled dataset it never saw.
    EvalUnseen(EvalUnseenArgs),
    /// Score the keyword baseline on a labeled dataset.
    Baseline(BaselineArgs),
    /// Score prediction files against a labeled dataset.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed for every random choice.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stop-word list, one word per line (bundled list by default).
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Contraction table, `form<TAB>expansion` per line.
    #[arg(long)]
    pub contractions: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportStyle {
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, value_enum)]
    pub rounding: Option<RoundingArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RoundingArg {
    Truncate,
    HalfUp,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Local dump: a GitHub dump (issues/, comments/) or a Stack Exchange
    /// dump (Posts.xml, Comments.xml).
    #[arg(long, conflicts_with = "github")]
    pub dump: Option<PathBuf>,
    /// Fetch owner/name from the GitHub API (token from GITHUB_TOKEN).
    #[arg(long)]
    pub github: Option<String>,
    /// Repository (owner/name) or site name recorded for dump documents.
    #[arg(long)]
    pub name: Option<String>,
    /// Stack Exchange tag filter; repeat for groups that must all match.
    #[arg(long = "tag")]
    pub tags: Vec<String>,
    #[arg(long, value_enum, default_value_t = IssueState::All)]
    pub state: IssueState,
    /// Keep a seeded uniform sample of this many paragraphs.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the ingest report as JSON here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// GloVe-style word vectors, required by GloVe models.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Sequence length for deep models.
    #[arg(long)]
    pub maxlen: Option<usize>,
    /// Maximum training epochs for deep models.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Early-stopping patience in epochs.
    #[arg(long)]
    pub patience: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Report name, e.g. TF-IDF+DT or DeepM1.
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub model_args: ModelArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Paragraph file; labels, if present, are ignored.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Comma-separated report names, or `all`.
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<String>,
    /// Add the keyword baseline row.
    #[arg(long)]
    pub baseline: bool,
    /// Number of folds.
    #[arg(long)]
    pub folds: Option<usize>,
    /// Keep the class ratio in every fold.
    #[arg(long)]
    pub stratify: bool,
    /// Metrics over pooled held-out predictions instead of the mean over folds.
    #[arg(long)]
    pub pooled: bool,
    /// Keyword ratio above which the baseline says security.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Keyword list, one keyword or phrase per line.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Keyword variants, `variant<TAB>canonical` per line.
    #[arg(long)]
    pub aliases: Option<PathBuf>,
    /// Report path; fold logs go to `<out>.folds.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub style: ReportStyle,
    #[command(flatten)]
    pub model_args: ModelArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct EvalUnseenArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub style: ReportStyle,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Keyword ratio above which the baseline says security.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Keyword list, one keyword or phrase per line.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Keyword variants, `variant<TAB>canonical` per line.
    #[arg(long)]
    pub aliases: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write per-paragraph predictions (score = keyword ratio).
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[command(flatten)]
    pub style: ReportStyle,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// `NAME=PATH` of a prediction file; repeatable.
    #[arg(long = "predictions", required = true)]
    pub predictions: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub style: ReportStyle,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    execute(cli)
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Preprocess(a) => cmd_preprocess(a),
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Cv(a) => cmd_cv(a),
        Command::EvalUnseen(a) => cmd_eval_unseen(a),
        Command::Baseline(a) => cmd_baseline(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn apply_common(cfg: &mut RunConfig, c: &CommonArgs) {
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if c.stopwords.is_some() {
        cfg.resources.stopwords = c.stopwords.clone();
    }
    if c.contractions.is_some() {
        cfg.resources.contractions = c.contractions.clone();
    }
}

fn apply_model(cfg: &mut RunConfig, m: &ModelArgs) {
    if m.embeddings.is_some() {
        cfg.resources.embeddings = m.embeddings.clone();
    }
    if let Some(v) = m.maxlen {
        cfg.maxlen = v;
    }
    if m.epochs.is_some() {
        cfg.train.epochs = m.epochs;
    }
    if m.patience.is_some() {
        cfg.train.patience = m.patience;
    }
}

fn apply_style(cfg: &mut RunConfig, s: &ReportStyle) {
    if let Some(f) = s.format {
        cfg.format = match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Table => ReportFormat::Table,
        };
    }
    if let Some(r) = s.rounding {
        cfg.rounding = match r {
            RoundingArg::Truncate => Rounding::Truncate,
            RoundingArg::HalfUp => Rounding::HalfUp,
        };
    }
}

fn resolve(common: Option<&CommonArgs>, edit: impl FnOnce(&mut RunConfig)) -> Result<RunConfig> {
    let mut cfg = RunConfig::load_or_default(common.and_then(|c| c.config.as_deref()))?;
    if let Some(c) = common {
        apply_common(&mut cfg, c);
    }
    edit(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn preprocess_config(cfg: &RunConfig) -> Result<PreprocessConfig> {
    Ok(resources::preprocess_config(cfg.resources.stopwords.as_deref(), cfg.resources.contractions.as_deref())?)
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    atomic_write(path, text.as_bytes()).with_context(|| format!("writing {}", path.display()))
}

/// Writes to `out`, else to `output_dir/default_name`, else to stdout.
fn emit(cfg: &RunConfig, out: Option<&Path>, default_name: &str, text: &str) -> Result<Option<PathBuf>> {
    let target = out.map(Path::to_path_buf).or_else(|| cfg.output_dir.as_ref().map(|d| d.join(default_name)));
    match target {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            write_out(&p, text)?;
            Ok(Some(p))
        }
        None => {
            print!("{text}");
            Ok(None)
        }
    }
}

fn report_text(cfg: &RunConfig, rows: &[MetricsRow], extra: &[String]) -> Result<String> {
    let mut out = String::new();
    for h in cfg.header().iter().chain(extra) {
        let _ = writeln!(out, "# {h}");
    }
    out.push_str(&render_report(rows, cfg.format, cfg.rounding)?);
    Ok(out)
}

fn tokenize(ds: &Dataset, pcfg: &PreprocessConfig) -> Vec<TokenList> {
    ds.records().iter().map(|r| preprocess(&r.paragraph, pcfg)).collect()
}

/// Word vectors for the given tokens, when a file is configured.
fn embeddings(cfg: &RunConfig, tokens: &[TokenList]) -> Result<Option<EmbeddingTable>> {
    let Some(path) = &cfg.resources.embeddings else { return Ok(None) };
    let keep: BTreeSet<String> = tokens.iter().flat_map(|t| t.tokens.iter().cloned()).collect();
    Ok(Some(resources::load_embeddings(path, Some(&keep), true)?))
}

fn require_dataset(flag: Option<&PathBuf>, cfg: &RunConfig) -> Result<PathBuf> {
    match flag.or(cfg.data.train.as_ref()) {
        Some(p) => Ok(p.clone()),
        None => bail!("no dataset given (use --dataset or data.train in the config)"),
    }
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    corpus_io::load_dataset(path).with_context(|| format!("loading {}", path.display()))
}

#[derive(Serialize)]
struct IngestSummary<'a> {
    config_hash: String,
    seed: u64,
    report: &'a ingest::IngestReport,
}

pub fn cmd_ingest(a: IngestArgs) -> Result<()> {
    let cfg = resolve(Some(&a.common), |_| {})?;
    let (docs, origin) = match (&a.dump, &a.github) {
        (Some(dir), _) => {
            if !dir.is_dir() {
                bail!("dump directory {} does not exist", dir.display());
            }
            let name = a.name.clone().unwrap_or_default();
            if dir.join("Posts.xml").is_file() {
                let tags: Vec<&str> = a.tags.iter().map(String::as_str).collect();
                let q = SourceQuery::stackexchange(&name, &tags);
                (stackexchange::fetch_dump(dir, &q)?, format!("stack exchange dump {}", dir.display()))
            } else {
                let q = SourceQuery::github(&name, a.state);
                (github::fetch_dump(dir, &q)?, format!("github dump {}", dir.display()))
            }
        }
        (None, Some(repo)) => {
            let client = github::GithubClient::new(github::UreqTransport::default(), Credentials::from_env());
            (client.fetch(&SourceQuery::github(repo, a.state))?, format!("github api {repo}"))
        }
        (None, None) => bail!("give --dump DIR or --github OWNER/NAME"),
    };
    let (mut paragraphs, mut report) = ingest::ingest_documents(&docs);
    if let Some(n) = a.sample {
        paragraphs = ingest::sample_paragraphs(&paragraphs, n, cfg.seed)?;
        report.paragraphs_emitted = paragraphs.len();
    }
    let provenance = format!("{origin}; config_hash={}; seed={}", cfg.hash(), cfg.seed);
    let name = a.out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    corpus_io::save_paragraph_file(&corpus_io::unlabeled(&name, &provenance, paragraphs), &a.out)?;
    let summary = serde_json::to_string_pretty(&IngestSummary { config_hash: cfg.hash(), seed: cfg.seed, report: &report })?;
    if let Some(p) = &a.report {
        write_out(p, &format!("{summary}\n"))?;
    }
    println!("{summary}");
    Ok(())
}

pub fn cmd_preprocess(a: PreprocessArgs) -> Result<()> {
    let cfg = resolve(Some(&a.common), |_| {})?;
    let pcfg = preprocess_config(&cfg)?;
    let file = corpus_io::load_paragraph_file(&a.dataset).with_context(|| format!("loading {}", a.dataset.display()))?;
    let mut out = String::new();
    for h in cfg.header() {
        let _ = writeln!(out, "# {h}");
    }
    for r in &file.records {
        let tokens = preprocess(&r.paragraph, &pcfg);
        let _ = writeln!(out, "{}\t{}", corpus_io::escape(&r.paragraph.paragraph_id), tokens.tokens.join(" "));
    }
    write_out(&a.out, &out)
}

pub fn cmd_train(a: TrainArgs) -> Result<()> {
    let cfg = resolve(Some(&a.common), |c| {
        apply_model(c, &a.model_args);
        c.models = vec![a.model.clone()];
    })?;
    let ds = load_dataset(&require_dataset(a.dataset.as_ref(), &cfg)?)?;
    let pcfg = preprocess_config(&cfg)?;
    let tokens = tokenize(&ds, &pcfg);
    let spec = cfg.spec(&a.model)?;
    let emb = embeddings(&cfg, &tokens)?;
    let model = fit(&spec, &tokens, &ds.labels(), &cfg.train_config(), emb.as_ref())?;
    for w in &model.warnings {
        eprintln!("warning: {w}");
    }
    let artifact = ModelArtifact { config_hash: cfg.hash(), master_seed: cfg.seed, preprocess: pcfg, model };
    model_io::save_model(&artifact, &a.out)?;
    eprintln!("trained {} on {} paragraphs -> {}", artifact.model.name(), ds.len(), a.out.display());
    Ok(())
}

pub fn cmd_predict(a: PredictArgs) -> Result<()> {
    let artifact = model_io::load_model(&a.model)?;
    let file: ParagraphFile = corpus_io::load_paragraph_file(&a.input).with_context(|| format!("loading {}", a.input.display()))?;
    let tokens: Vec<TokenList> = file.records.iter().map(|r| preprocess(&r.paragraph, &artifact.preprocess)).collect();
    let features = artifact.model.transform(&tokens);
    let pred = artifact.model.predict_features(&features)?;
    let ids: Vec<&str> = file.records.iter().map(|r| r.paragraph.paragraph_id.as_str()).collect();
    let header = vec![
        format!("model: {}", artifact.model.name()),
        format!("config_hash: {}", artifact.config_hash),
        format!("seed: {}", artifact.master_seed),
    ];
    write_out(&a.out, &predictions::format_predictions(&header, &ids, &pred)?)
}

#[derive(Serialize)]
struct FoldReport<'a> {
    config_hash: String,
    seed: u64,
    models: Vec<ModelFolds<'a>>,
}

#[derive(Serialize)]
struct ModelFolds<'a> {
    model: &'a str,
    folds: &'a [FoldLog],
}

/// Runs cross-validation of every configured model over one fold plan.
pub fn cross_validation(cfg: &RunConfig, ds: &Dataset) -> Result<Vec<CvOutcome>> {
    let pcfg = preprocess_config(cfg)?;
    let tokens = tokenize(ds, &pcfg);
    let labels = ds.labels();
    let specs = cfg.specs()?;
    if specs.is_empty() && !cfg.wants_baseline() {
        bail!("no models selected (use --models or --baseline)");
    }
    let needs_vectors = specs.iter().any(|s| s.feature_scheme == FeatureScheme::EmbeddingMean);
    let emb = embeddings(cfg, &tokens)?;
    if needs_vectors && emb.is_none() {
        bail!("GloVe models need word vectors (use --embeddings)");
    }
    let plan = if cfg.stratify {
        FoldPlan::stratified(&labels, cfg.folds, cfg.seed)?
    } else {
        FoldPlan::random(ds.len(), cfg.folds, cfg.seed)?
    };
    let mut models: Vec<Box<dyn FoldModel + '_>> = specs
        .into_iter()
        .map(|spec| {
            Box::new(SpecModel { spec, config: cfg.train_config(), embeddings: emb.as_ref() }) as Box<dyn FoldModel>
        })
        .collect();
    if cfg.wants_baseline() {
        let lexicon = resources::lexicon(cfg.resources.lexicon.as_deref(), cfg.resources.aliases.as_deref(), &pcfg)?;
        models.push(Box::new(KeywordBaseline { lexicon, threshold: cfg.threshold }));
    }
    let mut outcomes: Vec<CvOutcome> = Vec::new();
    for m in &models {
        let out = cross_validate(m.as_ref(), &tokens, &labels, &plan, cfg.cv_mode())?;
        eprintln!("cv: {} f1 {:.4}", out.row.model_name, out.row.f1);
        outcomes.push(out);
    }
    Ok(outcomes)
}

/// The report text and the per-fold logs as JSON.
pub fn cross_validation_report(cfg: &RunConfig, ds: &Dataset, outcomes: &[CvOutcome]) -> Result<(String, String)> {
    let rows: Vec<MetricsRow> = outcomes.iter().map(|o| o.row.clone()).collect();
    let mode = match cfg.cv_mode() {
        secdisc_core::eval::CvMode::MeanOfFolds => "mean of folds",
        secdisc_core::eval::CvMode::Pooled => "pooled",
    };
    let extra = vec![format!("dataset: {} ({} paragraphs)", ds.name, ds.len()), format!("folds: {} ({mode})", cfg.folds)];
    let report = report_text(cfg, &rows, &extra)?;
    let folds = FoldReport {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        models: outcomes.iter().map(|o| ModelFolds { model: &o.row.model_name, folds: &o.folds }).collect(),
    };
    Ok((report, serde_json::to_string_pretty(&folds)? + "\n"))
}

pub fn cmd_cv(a: CvArgs) -> Result<()> {
    let cfg = resolve(Some(&a.common), |c| {
        apply_model(c, &a.model_args);
        apply_style(c, &a.style);
        if !a.models.is_empty() {
            c.models = a.models.clone();
        }
        c.baseline |= a.baseline;
        c.stratify |= a.stratify;
        c.pooled |= a.pooled;
        if let Some(k) = a.folds {
            c.folds = k;
        }
        if let Some(t) = a.threshold {
            c.threshold = t;
        }
        if a.lexicon.is_some() {
            c.resources.lexicon = a.lexicon.clone();
        }
        if a.aliases.is_some() {
            c.resources.aliases = a.aliases.clone();
        }
        if a.dataset.is_some() {
            c.data.train = a.dataset.clone();
        }
    })?;
    let ds = load_dataset(&require_dataset(None, &cfg)?)?;
    let outcomes = cross_validation(&cfg, &ds)?;
    let (report, folds) = cross_validation_report(&cfg, &ds, &outcomes)?;
    if let Some(p) = emit(&cfg, a.out.as_deref(), "cv_report.csv", &report)? {
        let mut fp = p.into_os_string();
        fp.push(".folds.json");
        write_out(Path::new(&fp), &folds)?;
    }
    Ok(())
}

fn confusion_line(cm: &ConfusionMatrix) -> String {
    format!("confusion: tp={} fp={} tn={} fn={}", cm.tp, cm.fp, cm.tn, cm.fn_)
}

pub fn cmd_eval_unseen(a: EvalUnseenArgs) -> Result<()> {
    let artifact = model_io::load_model(&a.model)?;
    let mut cfg = RunConfig { seed: artifact.master_seed, ..RunConfig::default() };
    apply_style(&mut cfg, &a.style);
    let ds = load_dataset(&a.dataset)?;
    let tokens = tokenize(&ds, &artifact.preprocess);
    let (row, cm) = evaluate_unseen(&artifact.model, &tokens, &ds.labels())?;
    let extra = vec![
        format!("model_config_hash: {}", artifact.config_hash),
        format!("dataset: {} ({} paragraphs)", ds.name, ds.len()),
        confusion_line(&cm),
    ];
    let text = report_text(&cfg, &[row], &extra)?;
    emit(&cfg, a.out.as_deref(), "unseen_report.csv", &text)?;
    Ok(())
}

pub fn cmd_baseline(a: BaselineArgs) -> Result<()> {
    let cfg = resolve(Some(&a.common), |c| {
        apply_style(c, &a.style);
        if let Some(t) = a.threshold {
            c.threshold = t;
        }
        if a.lexicon.is_some() {
            c.resources.lexicon = a.lexicon.clone();
        }
        if a.aliases.is_some() {
            c.resources.aliases = a.aliases.clone();
        }
        c.baseline = true;
    })?;
    let ds = load_dataset(&require_dataset(a.dataset.as_ref(), &cfg)?)?;
    let pcfg = preprocess_config(&cfg)?;
    let lexicon = resources::lexicon(cfg.resources.lexicon.as_deref(), cfg.resources.aliases.as_deref(), &pcfg)?;
    let baseline = KeywordBaseline { lexicon, threshold: cfg.threshold };
    let pred = baseline.predict(&tokenize(&ds, &pcfg));
    let (row, cm) = MetricsRow::evaluate(baseline.name(), &ds.labels(), &pred.labels, Some(&pred.scores))?;
    let extra = vec![
        format!("dataset: {} ({} paragraphs)", ds.name, ds.len()),
        format!("threshold: {}", cfg.threshold),
        format!("keywords: {}", baseline.lexicon.len()),
        confusion_line(&cm),
    ];
    emit(&cfg, a.out.as_deref(), "baseline_report.csv", &report_text(&cfg, &[row], &extra)?)?;
    if let Some(p) = &a.predictions {
        let ids: Vec<&str> = ds.records().iter().map(|r| r.id()).collect();
        write_out(p, &predictions::format_predictions(&cfg.header(), &ids, &pred)?)?;
    }
    Ok(())
}

pub fn cmd_report(a: ReportArgs) -> Result<()> {
    let mut cfg = RunConfig::default();
    apply_style(&mut cfg, &a.style);
    let ds = load_dataset(&a.dataset)?;
    let mut rows = Vec::new();
    let mut extra = Vec::new();
    for spec in &a.predictions {
        let (name, path) = spec.split_once('=').unwrap_or((spec.as_str(), spec.as_str()));
        let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let map = predictions::parse_predictions(&text).with_context(|| format!("parsing {path}"))?;
        let (row, cm) = evaluate_predictions(name, &ds, &map).with_context(|| format!("scoring {path}"))?;
        if row.auc.is_none() {
            extra.push(format!("{name}: AUC not available"));
        }
        extra.push(format!("{name} {}", confusion_line(&cm)));
        rows.push(row);
    }
    emit(&cfg, a.out.as_deref(), "report.csv", &report_text(&cfg, &rows, &extra)?)?;
    Ok(())
}
