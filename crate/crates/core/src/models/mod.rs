//! The five classifiers behind one score-then-threshold contract.
//!
//! Scores are oriented so that higher means more relevant and the label is
//! `score > threshold` (strict).

mod baseline;
mod forest;
mod logistic;
mod naive_bayes;
mod standardize;
mod svm;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::balance::LabeledVectors;
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::text::TokenSeq;

pub use baseline::{baseline_classify, Baseline, KEYWORD_STEM};
pub use forest::{RandomForest, Tree};
pub use logistic::LogisticRegression;
pub use naive_bayes::BernoulliNb;
pub use standardize::Standardizer;
pub use svm::LinearSvm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Baseline,
    BernoulliNb,
    LogisticRegression,
    LinearSvm,
    RandomForest,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Baseline,
        ModelKind::BernoulliNb,
        ModelKind::LogisticRegression,
        ModelKind::LinearSvm,
        ModelKind::RandomForest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Baseline => "baseline",
            ModelKind::BernoulliNb => "bernoulli_nb",
            ModelKind::LogisticRegression => "logistic_regression",
            ModelKind::LinearSvm => "linear_svm",
            ModelKind::RandomForest => "random_forest",
        }
    }

    /// Hyperparameter names and their defaults.
    pub fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            ModelKind::Baseline => &[],
            ModelKind::BernoulliNb => &[("alpha", 1.0), ("binarize", 0.0)],
            ModelKind::LogisticRegression => &[("lambda", 1.0), ("max_iter", 10_000.0), ("tol", 1e-6)],
            ModelKind::LinearSvm => &[("lambda", 1.0), ("epochs", 20.0), ("project", 0.0)],
            ModelKind::RandomForest => &[
                ("trees", 100.0),
                ("min_samples_split", 2.0),
                ("max_features", 0.0),
                ("max_depth", 0.0),
            ],
        }
    }

    pub fn uses_features(self) -> bool {
        self != ModelKind::Baseline
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown model kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default)]
    pub hyper: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        ModelSpec {
            kind,
            hyper: BTreeMap::new(),
            seed: 0,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.hyper.insert(key.to_string(), value);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Rejects keys the kind does not understand and non-finite values.
    pub fn validate(&self) -> Result<()> {
        let known = self.kind.defaults();
        for (key, value) in &self.hyper {
            if !known.iter().any(|(k, _)| k == key) {
                return Err(Error::Config(format!(
                    "{} does not take hyperparameter {key:?}",
                    self.kind
                )));
            }
            if !value.is_finite() {
                return Err(Error::Config(format!("{}.{key} must be finite", self.kind)));
            }
        }
        let positive = ["alpha", "lambda", "max_iter", "tol", "epochs", "trees"];
        for key in positive {
            if self.hyper.get(key).is_some_and(|&v| v <= 0.0) {
                return Err(Error::Config(format!("{}.{key} must be positive", self.kind)));
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> f64 {
        self.hyper.get(key).copied().unwrap_or_else(|| {
            self.kind
                .defaults()
                .iter()
                .find(|(k, _)| *k == key)
                .map(|&(_, v)| v)
                .unwrap_or_else(|| panic!("{key} is not a {} hyperparameter", self.kind))
        })
    }

    fn get_usize(&self, key: &str) -> usize {
        self.get(key).max(0.0).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Learned {
    Baseline(Baseline),
    BernoulliNb(BernoulliNb),
    LogisticRegression(LogisticRegression),
    LinearSvm(LinearSvm),
    RandomForest(RandomForest),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    pub spec: ModelSpec,
    /// Input dimension; zero for the baseline.
    pub dim: usize,
    pub threshold: f64,
    pub learned: Learned,
}

pub fn train(spec: &ModelSpec, data: &LabeledVectors) -> Result<TrainedClassifier> {
    spec.validate()?;
    if spec.kind == ModelKind::Baseline {
        return Ok(TrainedClassifier {
            spec: spec.clone(),
            dim: 0,
            threshold: 0.5,
            learned: Learned::Baseline(Baseline::default()),
        });
    }
    if data.is_empty() {
        return Err(Error::Validation("cannot train on an empty data set".into()));
    }
    let positives = data.count(Label::Relevant);
    if positives == 0 || positives == data.len() {
        return Err(Error::SingleClass);
    }
    let y: Vec<bool> = data.labels.iter().map(|l| l.is_relevant()).collect();
    let x = &data.vectors;
    let (threshold, learned) = match spec.kind {
        ModelKind::Baseline => unreachable!(),
        ModelKind::BernoulliNb => (
            0.0,
            Learned::BernoulliNb(BernoulliNb::fit(x, &y, spec.get("alpha"), spec.get("binarize"))),
        ),
        ModelKind::LogisticRegression => (
            0.5,
            Learned::LogisticRegression(LogisticRegression::fit(
                x,
                &y,
                spec.get("lambda"),
                spec.get_usize("max_iter"),
                spec.get("tol"),
            )),
        ),
        ModelKind::LinearSvm => (
            0.0,
            Learned::LinearSvm(LinearSvm::fit(
                x,
                &y,
                spec.get("lambda"),
                spec.get_usize("epochs"),
                spec.get("project") != 0.0,
                spec.seed,
            )),
        ),
        ModelKind::RandomForest => (
            0.5,
            Learned::RandomForest(RandomForest::fit(
                x,
                &y,
                forest::Params {
                    trees: spec.get_usize("trees"),
                    min_samples_split: spec.get_usize("min_samples_split").max(2),
                    max_features: spec.get_usize("max_features"),
                    max_depth: spec.get_usize("max_depth"),
                },
                spec.seed,
            )),
        ),
    };
    Ok(TrainedClassifier {
        spec: spec.clone(),
        dim: data.dim(),
        threshold,
        learned,
    })
}

impl TrainedClassifier {
    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(match &self.learned {
            Learned::Baseline(_) => {
                return Err(Error::Incompatible(
                    "the keyword baseline scores token sequences, not vectors".into(),
                ))
            }
            Learned::BernoulliNb(m) => m.score(x),
            Learned::LogisticRegression(m) => m.score(x),
            Learned::LinearSvm(m) => m.score(x),
            Learned::RandomForest(m) => m.score(x),
        })
    }

    pub fn label(&self, score: f64) -> Label {
        Label::from_relevant(score > self.threshold)
    }

    pub fn predict_scores(&self, vectors: &[Vec<f64>]) -> Result<Vec<(f64, Label)>> {
        vectors
            .iter()
            .map(|v| self.score(v).map(|s| (s, self.label(s))))
            .collect()
    }

    /// Scores stemmed token sequences. Only the baseline works on tokens.
    pub fn score_tokens(&self, docs: &[TokenSeq]) -> Result<Vec<(f64, Label)>> {
        match &self.learned {
            Learned::Baseline(b) => Ok(docs
                .iter()
                .map(|d| {
                    let s = b.score(d);
                    (s, self.label(s))
                })
                .collect()),
            _ => Err(Error::Incompatible(format!(
                "{} scores feature vectors, not token sequences",
                self.kind()
            ))),
        }
    }
}
