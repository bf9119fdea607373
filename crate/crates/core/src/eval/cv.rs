use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{auc, confusion_metrics};
use crate::balance::{borderline_smote, noise_count, LabeledVectors};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::models::{train, ModelKind, ModelSpec};
use crate::seed;

fn shuffled_classes(labels: &[Label], seed: u64) -> [Vec<usize>; 2] {
    let mut rng = seed::rng(seed);
    let mut classes = [Vec::new(), Vec::new()];
    for (i, l) in labels.iter().enumerate() {
        classes[usize::from(!l.is_relevant())].push(i);
    }
    for c in &mut classes {
        c.shuffle(&mut rng);
    }
    classes
}

/// Stratified folds: each class is shuffled and dealt round-robin, the
/// non-relevant class continuing where the relevant one stopped, so fold
/// sizes and per-fold class counts differ by at most one.
pub fn stratified_folds(labels: &[Label], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::Validation("cross-validation needs at least 2 folds".into()));
    }
    if labels.len() < folds {
        return Err(Error::Validation(format!(
            "{} items cannot fill {folds} folds",
            labels.len()
        )));
    }
    let mut out = vec![Vec::new(); folds];
    let [pos, neg] = shuffled_classes(labels, seed);
    for (slot, i) in pos.into_iter().chain(neg).enumerate() {
        out[slot % folds].push(i);
    }
    out.iter_mut().for_each(|f| f.sort_unstable());
    Ok(out)
}

/// Stratified holdout split; returns sorted (train, test) indexes.
pub fn stratified_split(labels: &[Label], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Validation(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in shuffled_classes(labels, seed) {
        let n_test = (class.len() as f64 * test_fraction).round() as usize;
        test.extend_from_slice(&class[..n_test]);
        train.extend_from_slice(&class[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Extra non-relevant vectors appended to each training portion.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseVectors {
    pub vectors: Vec<Vec<f64>>,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOptions {
    pub folds: usize,
    /// `(m, k)` neighbor counts; `None` disables oversampling.
    pub smote: Option<(usize, usize)>,
    pub noise: Option<NoiseVectors>,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            folds: 5,
            smote: Some((crate::balance::DEFAULT_M_NEIGHBORS, crate::balance::DEFAULT_K_NEIGHBORS)),
            noise: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub spec: ModelSpec,
    pub mean_auc: f64,
    pub mean_f1: f64,
    pub fold_auc: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub best: ModelSpec,
    pub folds: usize,
    pub candidates: Vec<CandidateScore>,
}

fn subset(data: &LabeledVectors, idx: &[usize]) -> LabeledVectors {
    LabeledVectors::new(
        idx.iter().map(|&i| data.vectors[i].clone()).collect(),
        idx.iter().map(|&i| data.labels[i]).collect(),
    )
    .expect("rows of one data set share a dimension")
}

/// Appends `noise_count(len, proportion)` pool vectors, spread systematically
/// over a seeded shuffle, labeled non-relevant.
pub fn append_noise_vectors(mut train: LabeledVectors, noise: &NoiseVectors, seed: u64) -> Result<LabeledVectors> {
    let required = noise_count(train.len(), noise.proportion);
    if required == 0 {
        return Ok(train);
    }
    if required > noise.vectors.len() {
        return Err(Error::PoolTooSmall {
            required,
            available: noise.vectors.len(),
        });
    }
    let mut order: Vec<usize> = (0..noise.vectors.len()).collect();
    order.shuffle(&mut seed::rng(seed));
    let step = noise.vectors.len() / required;
    for j in 0..required {
        train.vectors.push(noise.vectors[order[j * step]].clone());
        train.labels.push(Label::NonRelevant);
        train.synthetic.push(false);
        train.parents.push(None);
    }
    Ok(train)
}

/// Picks the candidate with the best mean validation AUC (ties: mean F1,
/// then grid order). Oversampling and noise touch training portions only.
pub fn cross_validate_tune(
    specs: &[ModelSpec],
    data: &LabeledVectors,
    opts: &CvOptions,
    seed: u64,
) -> Result<TuneReport> {
    if specs.is_empty() {
        return Err(Error::Config("empty hyperparameter grid".into()));
    }
    if let Some(s) = specs.iter().find(|s| !s.kind.uses_features()) {
        return Err(Error::Config(format!("{} has nothing to tune", s.kind)));
    }
    if data.n_synthetic() > 0 {
        return Err(Error::Validation(
            "tune on original rows; oversampling happens inside each fold".into(),
        ));
    }
    let folds = stratified_folds(&data.labels, opts.folds, seed::derive_seed(seed, "folds", &[]))?;

    let prepared: Vec<(LabeledVectors, LabeledVectors)> = folds
        .iter()
        .enumerate()
        .map(|(f, test_idx)| {
            let train_idx: Vec<usize> = (0..data.len())
                .filter(|i| test_idx.binary_search(i).is_err())
                .collect();
            let mut train = subset(data, &train_idx);
            if let Some(noise) = &opts.noise {
                train = append_noise_vectors(train, noise, seed::derive_seed(seed, "fold-noise", &[f as u64]))?;
            }
            if let Some((m, k)) = opts.smote {
                train = borderline_smote(&train, m, k, seed::derive_seed(seed, "fold-smote", &[f as u64]))?;
            }
            Ok((train, subset(data, test_idx)))
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|c| (0..folds.len()).map(move |f| (c, f)))
        .collect();
    let results: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(c, f)| {
            let (train_set, test_set) = &prepared[f];
            let model = train(&specs[c], train_set)?;
            let scored = model.predict_scores(&test_set.vectors)?;
            let scores: Vec<f64> = scored.iter().map(|s| s.0).collect();
            let labels: Vec<Label> = scored.iter().map(|s| s.1).collect();
            let a = auc(&scores, &test_set.labels)?;
            let m = confusion_metrics(&labels, &test_set.labels)?;
            Ok((a, m.f1))
        })
        .collect::<Result<_>>()?;

    let k = folds.len();
    let candidates: Vec<CandidateScore> = specs
        .iter()
        .enumerate()
        .map(|(c, spec)| {
            let r = &results[c * k..(c + 1) * k];
            CandidateScore {
                spec: spec.clone(),
                mean_auc: r.iter().map(|x| x.0).sum::<f64>() / k as f64,
                mean_f1: r.iter().map(|x| x.1).sum::<f64>() / k as f64,
                fold_auc: r.iter().map(|x| x.0).collect(),
            }
        })
        .collect();
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate().skip(1) {
        let b = &candidates[best];
        if c.mean_auc > b.mean_auc || (c.mean_auc == b.mean_auc && c.mean_f1 > b.mean_f1) {
            best = i;
        }
    }
    Ok(TuneReport {
        best: candidates[best].spec.clone(),
        folds: k,
        candidates,
    })
}

/// Cartesian product of per-key value lists over a base spec. Keys iterate
/// in sorted order, the last key varying fastest.
pub fn expand_grid(kind: ModelKind, grid: &std::collections::BTreeMap<String, Vec<f64>>, seed: u64) -> Vec<ModelSpec> {
    let mut specs = vec![ModelSpec::new(kind).with_seed(seed)];
    for (key, values) in grid {
        if values.is_empty() {
            continue;
        }
        specs = specs
            .into_iter()
            .flat_map(|s| values.iter().map(move |&v| s.clone().with(key, v)))
            .collect();
    }
    specs
}
