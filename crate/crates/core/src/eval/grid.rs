use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{cross_validate_tune, expand_grid, stratified_folds, stratified_split, CvOptions};
use super::metrics::{score_metrics, MetricSet};
use crate::balance::{borderline_smote, inject_noise, LabeledVectors};
use crate::corpus::{Corpus, Label, Message};
use crate::error::{Error, Result};
use crate::models::{train, ModelKind, ModelSpec, TrainedClassifier};
use crate::pipeline::{FeatureConfig, LdaConfig, NbFeatures, Pipeline};
use crate::seed::{self, permille};
use crate::text::{analyze, TokenSeq};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// One stratified train/test split per cell.
    #[default]
    Holdout,
    /// Metrics averaged over stratified folds.
    CrossValidation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dims: Vec<usize>,
    pub noise: Vec<f64>,
    pub models: Vec<ModelKind>,
    pub test_fraction: f64,
    pub protocol: Protocol,
    pub folds: usize,
    /// Inject noise before the split so test sets carry their share of it.
    /// When false, noise goes into the training portion only.
    pub noise_in_test: bool,
    /// Pick hyperparameters per cell by cross-validation over `hyper`.
    pub tune: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            dims: vec![100, 500, 1000, 2000],
            noise: vec![0.0, 0.2, 0.4, 0.6, 0.8],
            models: ModelKind::ALL.to_vec(),
            test_fraction: 0.2,
            protocol: Protocol::Holdout,
            folds: 5,
            noise_in_test: true,
            tune: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoteConfig {
    pub enabled: bool,
    pub m: usize,
    pub k: usize,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            enabled: true,
            m: crate::balance::DEFAULT_M_NEIGHBORS,
            k: crate::balance::DEFAULT_K_NEIGHBORS,
        }
    }
}

impl SmoteConfig {
    pub fn neighbors(&self) -> Option<(usize, usize)> {
        self.enabled.then_some((self.m, self.k))
    }
}

/// Hyperparameter value lists per model kind.
pub type HyperGrid = BTreeMap<ModelKind, BTreeMap<String, Vec<f64>>>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub features: FeatureConfig,
    pub lda: LdaConfig,
    pub smote: SmoteConfig,
    pub grid: GridConfig,
    pub hyper: HyperGrid,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.dims.is_empty() || g.noise.is_empty() || g.models.is_empty() {
            return Err(Error::Config("grid dims, noise and models must be non-empty".into()));
        }
        if g.dims.contains(&0) {
            return Err(Error::Config("grid dims must be positive".into()));
        }
        if let Some(p) = g.noise.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Config(format!("noise proportion {p} outside [0, 1]")));
        }
        if !(g.test_fraction > 0.0 && g.test_fraction < 1.0) {
            return Err(Error::Config("test_fraction must lie in (0, 1)".into()));
        }
        for (kind, grid) in &self.hyper {
            for spec in expand_grid(*kind, grid, 0) {
                spec.validate()?;
            }
        }
        Ok(())
    }

    /// Candidate specs for one kind; the first is used when not tuning.
    pub fn candidates(&self, kind: ModelKind, seed: u64) -> Vec<ModelSpec> {
        match self.hyper.get(&kind) {
            Some(grid) => expand_grid(kind, grid, seed),
            None => vec![ModelSpec::new(kind).with_seed(seed)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub model: ModelKind,
    pub dims: usize,
    pub noise: f64,
    pub seed: u64,
    pub spec: ModelSpec,
    pub metrics: MetricSet,
    pub train_size: usize,
    pub test_size: usize,
    /// Injected noise messages that landed in evaluation partitions.
    pub test_noise: usize,
    pub synthetic: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: ModelKind,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub auc: f64,
    pub dims: usize,
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub dims: usize,
    pub noise: f64,
    pub model: ModelKind,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub seed: u64,
    pub corpus_size: usize,
    pub pool_size: usize,
    pub config: ExperimentConfig,
    pub cells: Vec<GridCell>,
    pub summary: Vec<SummaryRow>,
    pub series: Vec<SeriesPoint>,
}

/// Everything one (dims, noise) pair needs, computed once per split.
struct Prepared {
    train_tokens: Vec<TokenSeq>,
    test_tokens: Vec<TokenSeq>,
    train_msgs: Vec<Message>,
    test_msgs: Vec<Message>,
    test_noise: usize,
}

fn gold_labels(messages: &[Message]) -> Result<Vec<Label>> {
    messages
        .iter()
        .map(|m| {
            m.gold
                .ok_or_else(|| Error::Validation(format!("message {:?} has no gold label", m.id)))
        })
        .collect()
}

fn pick(messages: &[Message], tokens: &[TokenSeq], idx: &[usize]) -> (Vec<Message>, Vec<TokenSeq>) {
    idx.iter()
        .map(|&i| (messages[i].clone(), tokens[i].clone()))
        .unzip()
}

fn prepare_splits(corpus: &Corpus, pool: &Corpus, noise: f64, cfg: &ExperimentConfig, root: u64) -> Result<Vec<Prepared>> {
    let nkey = permille(noise);
    let noise_seed = seed::derive_seed(root, "noise", &[nkey]);
    let data = if cfg.grid.noise_in_test {
        inject_noise(corpus, pool, noise, noise_seed)?
    } else {
        corpus.clone()
    };
    let originals: HashSet<&str> = corpus.messages.iter().map(|m| m.id.as_str()).collect();
    let gold = gold_labels(&data.messages)?;
    let tokens: Vec<TokenSeq> = data.messages.par_iter().map(|m| analyze(&m.text)).collect();
    let split_seed = seed::derive_seed(root, "split", &[nkey]);
    let splits: Vec<(Vec<usize>, Vec<usize>)> = match cfg.grid.protocol {
        Protocol::Holdout => vec![stratified_split(&gold, cfg.grid.test_fraction, split_seed)?],
        Protocol::CrossValidation => {
            let folds = stratified_folds(&gold, cfg.grid.folds, split_seed)?;
            folds
                .iter()
                .map(|test| {
                    let train = (0..gold.len()).filter(|i| test.binary_search(i).is_err()).collect();
                    (train, test.clone())
                })
                .collect()
        }
    };
    splits
        .into_iter()
        .enumerate()
        .map(|(s, (train_idx, test_idx))| {
            let (mut train_msgs, mut train_tokens) = pick(&data.messages, &tokens, &train_idx);
            let (test_msgs, test_tokens) = pick(&data.messages, &tokens, &test_idx);
            if !cfg.grid.noise_in_test {
                let train_corpus = Corpus::new(train_msgs, "train split");
                let noisy = inject_noise(&train_corpus, pool, noise, seed::derive_seed(noise_seed, "split", &[s as u64]))?;
                train_tokens.extend(noisy.messages[train_tokens.len()..].iter().map(|m| analyze(&m.text)));
                train_msgs = noisy.messages;
            }
            let test_noise = test_msgs.iter().filter(|m| !originals.contains(m.id.as_str())).count();
            Ok(Prepared {
                train_tokens,
                test_tokens,
                train_msgs,
                test_msgs,
                test_noise,
            })
        })
        .collect()
}

fn kind_index(kind: ModelKind) -> u64 {
    ModelKind::ALL.iter().position(|&k| k == kind).unwrap_or(0) as u64
}

struct SplitOutcome {
    metrics: MetricSet,
    spec: ModelSpec,
    train_size: usize,
    test_size: usize,
    test_noise: usize,
    synthetic: usize,
}

/// Trains one kind on one prepared split and scores its test side.
fn evaluate_kind(
    kind: ModelKind,
    p: &Prepared,
    topic: &TopicSide,
    cfg: &ExperimentConfig,
    dims: usize,
    model_seed: u64,
) -> Result<SplitOutcome> {
    let y_test = gold_labels(&p.test_msgs)?;
    let outcome = |metrics, spec, train_size, synthetic| SplitOutcome {
        metrics,
        spec,
        train_size,
        test_size: p.test_msgs.len(),
        test_noise: p.test_noise,
        synthetic,
    };
    if kind == ModelKind::Baseline {
        let spec = ModelSpec::new(kind).with_seed(model_seed);
        let model = train(&spec, &LabeledVectors::default())?;
        let scored = model.score_tokens(&p.test_tokens)?;
        return Ok(outcome(score_metrics(&scored, &y_test)?, spec, p.train_msgs.len(), 0));
    }

    let tfidf_nb = kind == ModelKind::BernoulliNb && cfg.features.nb_features == NbFeatures::Tfidf;
    let (train_set, test_x, balanced) = if tfidf_nb {
        let pipeline = Pipeline::fit(&p.train_tokens, None, &cfg.features, &cfg.lda, model_seed)?;
        let x = pipeline.transform(&p.train_msgs, &p.train_tokens)?;
        let base = LabeledVectors::new(x, gold_labels(&p.train_msgs)?)?;
        let test_x = pipeline.transform(&p.test_msgs, &p.test_tokens)?;
        (base.clone(), test_x, base)
    } else {
        (topic.base.clone(), topic.test_x.clone(), topic.balanced.clone())
    };

    let mut candidates = cfg.candidates(kind, model_seed);
    if kind == ModelKind::BernoulliNb && !tfidf_nb {
        // a topic is "on" above uniform mass
        for c in &mut candidates {
            c.hyper.entry("binarize".into()).or_insert(1.0 / dims as f64);
        }
    }
    let spec = if cfg.grid.tune && candidates.len() > 1 {
        let opts = CvOptions {
            folds: cfg.grid.folds,
            smote: if tfidf_nb { None } else { cfg.smote.neighbors() },
            noise: None,
        };
        cross_validate_tune(&candidates, &train_set, &opts, model_seed)?.best
    } else {
        candidates.swap_remove(0)
    };
    let model: TrainedClassifier = train(&spec, &balanced)?;
    let scored = model.predict_scores(&test_x)?;
    Ok(outcome(
        score_metrics(&scored, &y_test)?,
        spec,
        train_set.len(),
        balanced.n_synthetic(),
    ))
}

/// Topic-space training and test data shared by all feature-based kinds.
struct TopicSide {
    base: LabeledVectors,
    balanced: LabeledVectors,
    test_x: Vec<Vec<f64>>,
}

fn topic_side(p: &Prepared, dims: usize, cfg: &ExperimentConfig, stage_seed: u64) -> Result<TopicSide> {
    let pipeline = Pipeline::fit(&p.train_tokens, Some(dims), &cfg.features, &cfg.lda, stage_seed)?;
    let x = pipeline.transform(&p.train_msgs, &p.train_tokens)?;
    let base = LabeledVectors::new(x, gold_labels(&p.train_msgs)?)?;
    let balanced = match cfg.smote.neighbors() {
        Some((m, k)) => borderline_smote(&base, m, k, seed::derive_seed(stage_seed, "smote", &[]))?,
        None => base.clone(),
    };
    let test_x = pipeline.transform(&p.test_msgs, &p.test_tokens)?;
    Ok(TopicSide {
        base,
        balanced,
        test_x,
    })
}

fn run_pair(corpus: &Corpus, pool: &Corpus, dims: usize, noise: f64, cfg: &ExperimentConfig, root: u64) -> Result<Vec<GridCell>> {
    let nkey = permille(noise);
    let splits = prepare_splits(corpus, pool, noise, cfg, root)?;
    let needs_topics = cfg.grid.models.iter().any(|&k| {
        k.uses_features() && !(k == ModelKind::BernoulliNb && cfg.features.nb_features == NbFeatures::Tfidf)
    });
    let mut per_kind: BTreeMap<ModelKind, Vec<SplitOutcome>> = BTreeMap::new();
    for (s, p) in splits.iter().enumerate() {
        let stage_seed = seed::derive_seed(root, "cell", &[dims as u64, nkey, s as u64]);
        let topic = if needs_topics {
            Some(topic_side(p, dims, cfg, stage_seed)?)
        } else {
            None
        };
        let empty = TopicSide {
            base: LabeledVectors::default(),
            balanced: LabeledVectors::default(),
            test_x: Vec::new(),
        };
        for &kind in &cfg.grid.models {
            let model_seed = seed::derive_seed(stage_seed, "model", &[kind_index(kind)]);
            let out = evaluate_kind(kind, p, topic.as_ref().unwrap_or(&empty), cfg, dims, model_seed)?;
            per_kind.entry(kind).or_default().push(out);
        }
    }
    Ok(per_kind
        .into_iter()
        .map(|(kind, outs)| {
            let metrics: Vec<MetricSet> = outs.iter().map(|o| o.metrics.clone()).collect();
            GridCell {
                model: kind,
                dims,
                noise,
                seed: outs[0].spec.seed,
                spec: outs[0].spec.clone(),
                metrics: if metrics.len() == 1 {
                    metrics[0].clone()
                } else {
                    MetricSet::mean(&metrics)
                },
                train_size: outs.iter().map(|o| o.train_size).sum(),
                test_size: outs.iter().map(|o| o.test_size).sum(),
                test_noise: outs.iter().map(|o| o.test_noise).sum(),
                synthetic: outs.iter().map(|o| o.synthetic).sum(),
            }
        })
        .collect())
}

/// Runs every (dims, noise) pair in parallel and assembles the report in
/// (model, dims, noise) order.
pub fn run_grid(corpus: &Corpus, pool: &Corpus, cfg: &ExperimentConfig, seed: u64) -> Result<GridReport> {
    cfg.validate()?;
    corpus.check_unique_ids()?;
    gold_labels(&corpus.messages)?;
    let pairs: Vec<(usize, f64)> = cfg
        .grid
        .dims
        .iter()
        .flat_map(|&d| cfg.grid.noise.iter().map(move |&n| (d, n)))
        .collect();
    let mut cells: Vec<GridCell> = pairs
        .par_iter()
        .map(|&(dims, noise)| {
            run_pair(corpus, pool, dims, noise, cfg, seed).map_err(|e| Error::Cell {
                dims,
                noise,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    cells.sort_by(|a, b| {
        (a.model, a.dims)
            .cmp(&(b.model, b.dims))
            .then(a.noise.total_cmp(&b.noise))
    });
    let summary = summarize(&cells);
    let mut series: Vec<SeriesPoint> = cells
        .iter()
        .map(|c| SeriesPoint {
            dims: c.dims,
            noise: c.noise,
            model: c.model,
            auc: c.metrics.auc.unwrap_or(f64::NAN),
        })
        .collect();
    series.sort_by(|a, b| {
        a.dims
            .cmp(&b.dims)
            .then(a.noise.total_cmp(&b.noise))
            .then(a.model.cmp(&b.model))
    });
    Ok(GridReport {
        seed,
        corpus_size: corpus.len(),
        pool_size: pool.len(),
        config: cfg.clone(),
        cells,
        summary,
        series,
    })
}

/// Best cell per model: highest F1, then AUC, then smaller dims, then
/// smaller noise.
pub fn summarize(cells: &[GridCell]) -> Vec<SummaryRow> {
    let mut best: BTreeMap<ModelKind, &GridCell> = BTreeMap::new();
    for c in cells {
        let better = match best.get(&c.model) {
            None => true,
            Some(b) => {
                let auc = |x: &GridCell| x.metrics.auc.unwrap_or(f64::NEG_INFINITY);
                c.metrics
                    .f1
                    .total_cmp(&b.metrics.f1)
                    .then(auc(c).total_cmp(&auc(b)))
                    .then(b.dims.cmp(&c.dims))
                    .then(b.noise.total_cmp(&c.noise))
                    .is_gt()
            }
        };
        if better {
            best.insert(c.model, c);
        }
    }
    best.into_values()
        .map(|c| SummaryRow {
            model: c.model,
            precision: c.metrics.precision,
            recall: c.metrics.recall,
            f1: c.metrics.f1,
            accuracy: c.metrics.accuracy,
            auc: c.metrics.auc.unwrap_or(f64::NAN),
            dims: c.dims,
            noise: c.noise,
        })
        .collect()
}

impl GridReport {
    pub fn cell(&self, model: ModelKind, dims: usize, noise: f64) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.model == model && c.dims == dims && permille(c.noise) == permille(noise))
    }

    pub fn summary_for(&self, model: ModelKind) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.model == model)
    }

    /// Writes `report.json`, `table1.csv` and `fig2_series.csv`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let report = dir.join("report.json");
        let mut json = serde_json::to_vec_pretty(self)?;
        json.push(b'\n');
        fs::write(&report, json).map_err(|e| Error::io(&report, e))?;

        let table = dir.join("table1.csv");
        let mut w = csv::Writer::from_path(&table).map_err(|e| csv_err(&table, e))?;
        for row in &self.summary {
            w.serialize(row).map_err(|e| csv_err(&table, e))?;
        }
        w.flush().map_err(|e| Error::io(&table, e))?;

        let fig = dir.join("fig2_series.csv");
        let mut w = csv::Writer::from_path(&fig).map_err(|e| csv_err(&fig, e))?;
        for p in &self.series {
            w.serialize(p).map_err(|e| csv_err(&fig, e))?;
        }
        w.flush().map_err(|e| Error::io(&fig, e))?;
        Ok(())
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let message = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        _ => Error::Validation(format!("{}: {message}", path.display())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::metrics::Confusion;

    fn cell(model: ModelKind, dims: usize, noise: f64, f1: f64, auc: f64) -> GridCell {
        let mut metrics = MetricSet::from_confusion(Confusion { tp: 1, fp: 1, fn_: 1, tn: 1 });
        metrics.f1 = f1;
        metrics.auc = Some(auc);
        GridCell {
            model,
            dims,
            noise,
            seed: 0,
            spec: ModelSpec::new(model),
            metrics,
            train_size: 0,
            test_size: 4,
            test_noise: 0,
            synthetic: 0,
        }
    }

    #[test]
    fn summary_tie_breaks() {
        let rf = ModelKind::RandomForest;
        let cells = [
            cell(rf, 500, 0.0, 0.7, 0.8),
            cell(rf, 100, 0.2, 0.7, 0.9),
            cell(rf, 1000, 0.4, 0.7, 0.9),
            cell(rf, 100, 0.0, 0.7, 0.9),
            cell(ModelKind::Baseline, 100, 0.0, 0.5, 0.5),
        ];
        let s = summarize(&cells);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].model, ModelKind::Baseline);
        assert_eq!((s[1].dims, s[1].noise), (100, 0.0));
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        cfg.grid.noise = vec![1.5];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.hyper.insert(ModelKind::RandomForest, [("lambda".to_string(), vec![1.0])].into());
        assert!(cfg.validate().is_err());
    }
}
