//! Command-line front end. Each subcommand is also a plain function so it
//! can be driven from code.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::agreement::{self, ValidationReport};
use crate::artifact::ModelArtifact;
use crate::balance::{borderline_smote, LabeledVectors};
use crate::config::RunConfig;
use crate::corpus::{self, Corpus, Message};
use crate::error::{Error, Result};
use crate::eval::{self, append_noise_vectors, CvOptions, GridReport, NoiseVectors, TuneReport};
use crate::models::{self, ModelKind, ModelSpec};
use crate::pipeline::{NbFeatures, Pipeline};
use crate::seed;
use crate::text::{analyze, TokenSeq};

#[derive(Debug, Parser)]
#[command(name = "quakefilter", version, about = "Relevance filtering experiments for earthquake tweets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Root seed for every random stage.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample, deduplicate and filter the raw corpus and noise pool.
    Prepare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        pool: Option<PathBuf>,
        /// Seismic events CSV (event_time,magnitude).
        #[arg(long)]
        events: Option<PathBuf>,
        #[arg(long)]
        target: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
        /// Noise levels the prepared data will feed; any positive level
        /// requires a pool.
        #[arg(long, value_delimiter = ',')]
        noise: Option<Vec<f64>>,
        /// Sample without per-day strata.
        #[arg(long)]
        no_stratify: bool,
    },
    /// Majority-vote gold labels and rater agreement statistics.
    ValidateLabels {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Cross-validate a hyperparameter grid and save the best model.
    Tune {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        pool: Option<PathBuf>,
        #[arg(long)]
        model: Option<ModelKind>,
        #[arg(long)]
        dims: Option<usize>,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        folds: Option<usize>,
    },
    /// Run the dims x noise x model experiment grid.
    Grid {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        pool: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        noise: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<ModelKind>>,
    },
    /// Score JSONL messages with a saved model, streaming.
    Classify {
        #[arg(long)]
        model: PathBuf,
        /// Input JSONL; `-` reads stdin.
        #[arg(long, default_value = "-")]
        input: PathBuf,
        /// Output JSONL; `-` writes stdout.
        #[arg(long, default_value = "-")]
        output: PathBuf,
    },
}

fn base_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_path(slot: &mut Option<PathBuf>, value: Option<PathBuf>) {
    if value.is_some() {
        *slot = value;
    }
}

/// Parses arguments, runs the command and returns the process exit code:
/// 0 on success, 1 on validation errors, 2 on runtime errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Prepare {
            common,
            input,
            pool,
            events,
            target,
            tolerance,
            noise,
            no_stratify,
        } => {
            let mut cfg = base_config(&common)?;
            set_path(&mut cfg.paths.corpus, input);
            set_path(&mut cfg.paths.pool, pool);
            set_path(&mut cfg.paths.events, events);
            if target.is_some() {
                cfg.prepare.target = target;
            }
            set(&mut cfg.prepare.tolerance, tolerance);
            set(&mut cfg.grid.noise, noise);
            if no_stratify {
                cfg.prepare.stratify_by_day = false;
            }
            let out = cfg.output_dir(common.out.as_deref());
            let s = prepare(&cfg, &out)?;
            eprintln!("prepared {} messages, pool {} -> {}", s.prepared, s.pool, out.display());
        }
        Command::ValidateLabels { common, input } => {
            let mut cfg = base_config(&common)?;
            set_path(&mut cfg.paths.corpus, input);
            let out = cfg.output_dir(common.out.as_deref());
            let r = validate_labels(&cfg, &out)?;
            eprintln!(
                "n={} kappa={:?} icc={:?} rejects={}",
                r.n,
                r.fleiss_kappa,
                r.icc_2_1,
                r.rejects.len()
            );
        }
        Command::Tune {
            common,
            input,
            pool,
            model,
            dims,
            noise,
            folds,
        } => {
            let mut cfg = base_config(&common)?;
            set_path(&mut cfg.paths.corpus, input);
            set_path(&mut cfg.paths.pool, pool);
            set(&mut cfg.tune.model, model);
            set(&mut cfg.tune.dims, dims);
            set(&mut cfg.tune.noise, noise);
            set(&mut cfg.grid.folds, folds);
            let out = cfg.output_dir(common.out.as_deref());
            let t = tune(&cfg, &out)?;
            eprintln!("best {:?} -> {}", t.report.best.hyper, out.display());
        }
        Command::Grid {
            common,
            input,
            pool,
            dims,
            noise,
            models,
        } => {
            let mut cfg = base_config(&common)?;
            set_path(&mut cfg.paths.corpus, input);
            set_path(&mut cfg.paths.pool, pool);
            set(&mut cfg.grid.dims, dims);
            set(&mut cfg.grid.noise, noise);
            set(&mut cfg.grid.models, models);
            let out = cfg.output_dir(common.out.as_deref());
            let r = grid(&cfg, &out)?;
            eprintln!("{} cells -> {}", r.cells.len(), out.display());
        }
        Command::Classify {
            model,
            input,
            output,
        } => {
            let artifact = ModelArtifact::load(&model)?;
            let stdin = io::stdin();
            let reader: Box<dyn BufRead> = if input == Path::new("-") {
                Box::new(stdin.lock())
            } else {
                Box::new(BufReader::new(File::open(&input).map_err(|e| Error::io(&input, e))?))
            };
            let writer: Box<dyn Write> = if output == Path::new("-") {
                Box::new(io::stdout().lock())
            } else {
                Box::new(File::create(&output).map_err(|e| Error::io(&output, e))?)
            };
            classify(&artifact, reader, &input, BufWriter::new(writer))?;
        }
    }
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn load(cfg: &RunConfig, path: &Path) -> Result<Corpus> {
    let c = corpus::load_corpus(path, cfg.corpus_format(path))?;
    c.check_unique_ids()?;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageCount {
    pub stage: String,
    pub input: usize,
    pub kept: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareSummary {
    pub prepared: usize,
    pub pool: usize,
    pub stages: Vec<StageCount>,
}

fn stage(name: &str, input: usize, kept: usize) -> StageCount {
    StageCount {
        stage: name.to_string(),
        input,
        kept,
        dropped: input - kept,
    }
}

/// Writes `prepared.jsonl`, `pool.jsonl` (when a pool is configured) and
/// `provenance.json`, the only output carrying a wall-clock time.
pub fn prepare(cfg: &RunConfig, out: &Path) -> Result<PrepareSummary> {
    cfg.validate()?;
    let input = cfg.require_corpus()?;
    let pool_path = cfg.require_pool(&cfg.grid.noise)?;
    let raw = load(cfg, input)?;
    let mut stages = vec![stage("load", raw.len(), raw.len())];

    let p = &cfg.prepare;
    let target = p.target.unwrap_or(raw.len());
    let sampled = if p.stratify_by_day {
        corpus::systematic_sample(&raw, target, Some(Message::day))
    } else {
        corpus::systematic_sample(&raw, target, None::<fn(&Message) -> i64>)
    };
    stages.push(stage("systematic_sample", raw.len(), sampled.len()));
    let deduped = corpus::dedup_levenshtein(&sampled, p.tolerance);
    stages.push(stage("dedup_levenshtein", sampled.len(), deduped.len()));

    create_dir(out)?;
    corpus::write_jsonl(&deduped, out.join("prepared.jsonl"))?;

    let mut pool_len = 0;
    if let Some(pp) = pool_path {
        let pool = load(cfg, pp)?;
        stages.push(stage("pool_load", pool.len(), pool.len()));
        let filtered = match &cfg.paths.events {
            Some(ev) => {
                let events = corpus::load_events(ev)?;
                let f = corpus::filter_event_windows(&pool, &events, p.min_magnitude, p.window_before, p.window_after);
                stages.push(stage("event_window_filter", pool.len(), f.len()));
                f
            }
            None => pool,
        };
        pool_len = filtered.len();
        corpus::write_jsonl(&filtered, out.join("pool.jsonl"))?;
    }

    let generated_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let provenance = serde_json::json!({
        "generated_at": generated_at,
        "corpus": input,
        "pool": pool_path,
        "events": cfg.paths.events,
        "prepare": p,
        "stages": stages,
    });
    write_json(&out.join("provenance.json"), &provenance)?;
    Ok(PrepareSummary {
        prepared: deduped.len(),
        pool: pool_len,
        stages,
    })
}

/// Writes `labeled.jsonl` (accepted messages with gold labels) and
/// `validation.json`.
pub fn validate_labels(cfg: &RunConfig, out: &Path) -> Result<ValidationReport> {
    let input = cfg.require_corpus()?;
    let corpus = load(cfg, input)?;
    let (labeled, report) = agreement::validate_labels(&corpus);
    create_dir(out)?;
    corpus::write_jsonl(&labeled, out.join("labeled.jsonl"))?;
    write_json(&out.join("validation.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub model: ModelKind,
    pub dims: usize,
    pub noise: f64,
    pub seed: u64,
    pub report: TuneReport,
}

fn tokens_of(messages: &[Message]) -> Vec<TokenSeq> {
    use rayon::prelude::*;
    messages.par_iter().map(|m| analyze(&m.text)).collect()
}

fn gold_of(corpus: &Corpus) -> Result<Vec<crate::corpus::Label>> {
    corpus
        .messages
        .iter()
        .map(|m| {
            m.gold.ok_or_else(|| {
                Error::Validation(format!(
                    "message {:?} has no gold label; run validate-labels first",
                    m.id
                ))
            })
        })
        .collect()
}

/// Cross-validates the configured grid for one model kind, then trains the
/// best spec on the whole corpus. Writes `tune.json` and `model.json`.
///
/// The vocabulary and topic model are fit once on the whole corpus before
/// the folds are drawn.
pub fn tune(cfg: &RunConfig, out: &Path) -> Result<TuneOutcome> {
    cfg.validate()?;
    let t = &cfg.tune;
    let corpus = load(cfg, cfg.require_corpus()?)?;
    let gold = gold_of(&corpus)?;
    let pool = cfg
        .require_pool(&[t.noise])?
        .filter(|_| t.noise > 0.0)
        .map(|p| load(cfg, p))
        .transpose()?;
    create_dir(out)?;

    if t.model == ModelKind::Baseline {
        let spec = ModelSpec::new(ModelKind::Baseline);
        let model = models::train(&spec, &LabeledVectors::default())?;
        ModelArtifact::new(None, model)?.save(out.join("model.json"))?;
        let outcome = TuneOutcome {
            model: t.model,
            dims: t.dims,
            noise: t.noise,
            seed: cfg.seed,
            report: TuneReport {
                best: spec,
                folds: 0,
                candidates: Vec::new(),
            },
        };
        write_json(&out.join("tune.json"), &outcome)?;
        return Ok(outcome);
    }

    let tfidf_nb = t.model == ModelKind::BernoulliNb && cfg.features.nb_features == NbFeatures::Tfidf;
    let tokens = tokens_of(&corpus.messages);
    let pipeline_seed = seed::derive_seed(cfg.seed, "tune-pipeline", &[t.dims as u64]);
    let dims = (!tfidf_nb).then_some(t.dims);
    let pipeline = Pipeline::fit(&tokens, dims, &cfg.features, &cfg.lda, pipeline_seed)?;
    let data = LabeledVectors::new(pipeline.transform(&corpus.messages, &tokens)?, gold)?;
    let noise = match &pool {
        Some(p) => Some(NoiseVectors {
            vectors: pipeline.transform(&p.messages, &tokens_of(&p.messages))?,
            proportion: t.noise,
        }),
        None => None,
    };

    let experiment = cfg.experiment();
    let mut candidates = experiment.candidates(t.model, seed::derive_seed(cfg.seed, "tune-model", &[]));
    if t.model == ModelKind::BernoulliNb && !tfidf_nb {
        for c in &mut candidates {
            c.hyper.entry("binarize".into()).or_insert(1.0 / t.dims as f64);
        }
    }
    let smote = if tfidf_nb { None } else { cfg.smote.neighbors() };
    let opts = CvOptions {
        folds: cfg.grid.folds,
        smote,
        noise: noise.clone(),
    };
    let report = eval::cross_validate_tune(&candidates, &data, &opts, cfg.seed)?;

    let mut train_set = data;
    if let Some(n) = &noise {
        train_set = append_noise_vectors(train_set, n, seed::derive_seed(cfg.seed, "tune-noise", &[]))?;
    }
    if let Some((m, k)) = smote {
        train_set = borderline_smote(&train_set, m, k, seed::derive_seed(cfg.seed, "tune-smote", &[]))?;
    }
    let model = models::train(&report.best, &train_set)?;
    ModelArtifact::new(Some(pipeline), model)?.save(out.join("model.json"))?;
    let outcome = TuneOutcome {
        model: t.model,
        dims: t.dims,
        noise: t.noise,
        seed: cfg.seed,
        report,
    };
    write_json(&out.join("tune.json"), &outcome)?;
    Ok(outcome)
}

/// Runs the experiment grid and writes `report.json`, `table1.csv` and
/// `fig2_series.csv`.
pub fn grid(cfg: &RunConfig, out: &Path) -> Result<GridReport> {
    cfg.validate()?;
    let corpus = load(cfg, cfg.require_corpus()?)?;
    let pool = match cfg.require_pool(&cfg.grid.noise)? {
        Some(p) => load(cfg, p)?,
        None => Corpus::new(Vec::new(), "no pool"),
    };
    let report = eval::run_grid(&corpus, &pool, &cfg.experiment(), cfg.seed)?;
    report.write(out)?;
    Ok(report)
}

/// Streams JSONL records through the model, appending `score` and
/// `predicted` to each. Blank lines are skipped. Returns the record count.
pub fn classify<R: BufRead, W: Write>(artifact: &ModelArtifact, input: R, name: &Path, mut output: W) -> Result<usize> {
    let mut count = 0;
    for (i, line) in input.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| Error::io(name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let message = corpus::parse_jsonl_record(&line, name, line_no)?;
        let mut record: serde_json::Map<String, serde_json::Value> =
            serde_json::from_str(&line).map_err(|e| Error::Parse {
                path: name.to_path_buf(),
                line: line_no,
                message: e.to_string(),
            })?;
        let (score, label) = artifact.classify(&message)?;
        record.insert("score".into(), serde_json::json!(score));
        record.insert("predicted".into(), serde_json::json!(label.as_str()));
        serde_json::to_writer(&mut output, &record)?;
        output.write_all(b"\n").map_err(|e| Error::io(name, e))?;
        count += 1;
    }
    output.flush().map_err(|e| Error::io(name, e))?;
    Ok(count)
}
