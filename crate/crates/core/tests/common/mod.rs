//! Checks shared by the integration tests and the acceptance runner. Each
//! returns `Err(reason)` instead of panicking so the runner can report it.
#![allow(dead_code)]

use std::collections::HashSet;

use quakefilter::balance::{borderline_smote, LabeledVectors};
use quakefilter::corpus::Label;
use quakefilter::eval::{auc, confusion_metrics};
use quakefilter::features::build_vocabulary;
use quakefilter::text::TokenSeq;
use quakefilter::topics::{lda_train, lda_train_traced, LdaParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub type Check = Result<(), String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fraction of positive-negative pairs ordered correctly, ties counted as
/// half.
pub fn brute_force_auc(scores: &[f64], truth: &[Label]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, ti) in truth.iter().enumerate() {
        if !ti.is_relevant() {
            continue;
        }
        for (j, tj) in truth.iter().enumerate() {
            if tj.is_relevant() {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// `sets` random score/label sets of size 2..=500; every other set draws
/// scores from a coarse grid so ties are common.
pub fn auc_matches_brute_force(sets: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    for s in 0..sets {
        let n = r.gen_range(2..=500);
        let mut truth: Vec<Label> = (0..n).map(|_| Label::from_relevant(r.gen_bool(0.3))).collect();
        truth[0] = Label::Relevant;
        truth[1] = Label::NonRelevant;
        let coarse = s % 2 == 1;
        let scores: Vec<f64> = (0..n)
            .map(|_| {
                let x: f64 = r.gen();
                if coarse {
                    (x * 10.0).floor() / 10.0
                } else {
                    x
                }
            })
            .collect();
        let got = auc(&scores, &truth).map_err(|e| e.to_string())?;
        let want = brute_force_auc(&scores, &truth);
        if (got - want).abs() > 1e-9 {
            return Err(format!("set {s} (n={n}): trapezoid {got} vs pairwise {want}"));
        }
    }
    Ok(())
}

pub fn confusion_matches_definitions(sets: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    for s in 0..sets {
        let n = r.gen_range(1..=200);
        let truth: Vec<Label> = (0..n).map(|_| Label::from_relevant(r.gen_bool(0.4))).collect();
        let pred: Vec<Label> = (0..n).map(|_| Label::from_relevant(r.gen_bool(0.4))).collect();
        let count = |p: bool, t: bool| {
            pred.iter()
                .zip(&truth)
                .filter(|(a, b)| a.is_relevant() == p && b.is_relevant() == t)
                .count()
        };
        let (tp, fp, fn_, tn) = (count(true, true), count(true, false), count(false, true), count(false, false));
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let accuracy = (tp + tn) as f64 / n as f64;
        let m = confusion_metrics(&pred, &truth).map_err(|e| e.to_string())?;
        let c = m.confusion;
        if (c.tp, c.fp, c.fn_, c.tn) != (tp, fp, fn_, tn)
            || m.precision != precision
            || m.recall != recall
            || m.f1 != f1
            || m.accuracy != accuracy
        {
            return Err(format!("set {s}: {m:?} vs tp={tp} fp={fp} fn={fn_} tn={tn}"));
        }
    }
    Ok(())
}

/// Minority points whose `m` nearest neighbors (full sort, ties by index)
/// are all majority.
pub fn all_majority_neighborhoods(data: &LabeledVectors, m: usize) -> Vec<usize> {
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    (0..data.len())
        .filter(|&i| data.labels[i].is_relevant())
        .filter(|&i| {
            let mut others: Vec<(f64, usize)> = (0..data.len())
                .filter(|&j| j != i)
                .map(|j| (dist(&data.vectors[i], &data.vectors[j]), j))
                .collect();
            others.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            others.iter().take(m).all(|&(_, j)| !data.labels[j].is_relevant())
        })
        .collect()
}

/// One random overlapping two-blob configuration, with a few minority
/// points planted deep inside the majority blob.
pub fn random_smote_config(seed: u64) -> LabeledVectors {
    let mut r = rng(seed);
    let dim = r.gen_range(2..=6);
    let n_maj = r.gen_range(40..=120);
    let n_min = r.gen_range(8..=30);
    let gap = r.gen_range(0.5..3.0);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..n_maj {
        vectors.push((0..dim).map(|_| normal.sample(&mut r)).collect());
        labels.push(Label::NonRelevant);
    }
    for i in 0..n_min {
        let v = if i < 2 {
            let side = if i == 0 { -0.6 } else { 0.6 };
            (0..dim).map(|j| if j == 0 { side } else { 0.0 } + 0.01 * normal.sample(&mut r)).collect()
        } else {
            (0..dim).map(|_| gap + normal.sample(&mut r)).collect()
        };
        vectors.push(v);
        labels.push(Label::Relevant);
    }
    LabeledVectors::new(vectors, labels).unwrap()
}

/// Convexity of every synthetic point, class balance afterwards, and no
/// synthetic point tied to an all-majority neighborhood. Returns whether
/// the configuration contained such a point.
pub fn smote_geometry(seed: u64) -> Result<bool, String> {
    let data = random_smote_config(seed);
    let (m, k) = (5, 5);
    let out = borderline_smote(&data, m, k, seed).map_err(|e| format!("config {seed}: {e}"))?;
    if out.count(Label::Relevant) != out.count(Label::NonRelevant) {
        return Err(format!("config {seed}: classes not balanced"));
    }
    if out.vectors[..data.len()] != data.vectors[..] {
        return Err(format!("config {seed}: original rows changed"));
    }
    let noise: HashSet<usize> = all_majority_neighborhoods(&data, m).into_iter().collect();
    let n_min = data.count(Label::Relevant);
    for i in data.len()..out.len() {
        if !out.synthetic[i] || out.labels[i] != Label::Relevant {
            return Err(format!("config {seed}: row {i} not a relevant synthetic"));
        }
        let Some((p, q)) = out.parents[i] else {
            return Err(format!("config {seed}: row {i} has no parents"));
        };
        if !data.labels[p].is_relevant() || !data.labels[q].is_relevant() {
            return Err(format!("config {seed}: row {i} has a majority parent"));
        }
        if noise.len() + 1 < n_min && (noise.contains(&p) || noise.contains(&q)) {
            return Err(format!("config {seed}: row {i} built from an all-majority neighborhood"));
        }
        let (a, b, s) = (&data.vectors[p], &data.vectors[q], &out.vectors[i]);
        for j in 0..s.len() {
            let (lo, hi) = if a[j] <= b[j] { (a[j], b[j]) } else { (b[j], a[j]) };
            if s[j] < lo - 1e-12 || s[j] > hi + 1e-12 {
                return Err(format!("config {seed}: row {i} coordinate {j} outside its parents"));
            }
        }
    }
    Ok(!noise.is_empty())
}

/// Two document groups over disjoint vocabularies.
pub fn two_group_docs(seed: u64) -> (Vec<TokenSeq>, HashSet<String>) {
    let mut r = rng(seed ^ 0x5eed);
    let a: Vec<String> = (0..20).map(|i| format!("alfa{i}")).collect();
    let b: Vec<String> = (0..20).map(|i| format!("beta{i}")).collect();
    let mut docs = Vec::new();
    for d in 0..80 {
        let words = if d % 2 == 0 { &a } else { &b };
        docs.push((0..15).map(|_| words[r.gen_range(0..words.len())].clone()).collect());
    }
    (docs, a.into_iter().collect())
}

/// Smallest share of topic mass on its dominant group's vocabulary, for a
/// two-topic model trained with `sweeps` sweeps.
pub fn two_topic_purity(seed: u64, sweeps: usize) -> Result<f64, String> {
    let (docs, group_a) = two_group_docs(seed);
    let vocab = build_vocabulary(&docs, 1).map_err(|e| e.to_string())?;
    let params = LdaParams {
        sweeps,
        ..LdaParams::new(2, seed)
    };
    let model = lda_train(&docs, &vocab, &params).map_err(|e| e.to_string())?;
    let purity = (0..2)
        .map(|k| {
            let on_a: f64 = vocab
                .terms()
                .iter()
                .zip(model.phi(k))
                .filter(|(t, _)| group_a.contains(t.as_str()))
                .map(|(_, p)| p)
                .sum();
            on_a.max(1.0 - on_a)
        })
        .fold(1.0, f64::min);
    Ok(purity)
}

/// Mean log-likelihood of the first and the last ten checkpoints.
pub fn likelihood_trend(seed: u64, sweeps: usize) -> Result<(f64, f64), String> {
    let (docs, _) = two_group_docs(seed);
    let vocab = build_vocabulary(&docs, 1).map_err(|e| e.to_string())?;
    let params = LdaParams {
        sweeps,
        ..LdaParams::new(4, seed)
    };
    let (_, trace) = lda_train_traced(&docs, &vocab, &params).map_err(|e| e.to_string())?;
    let ll: Vec<f64> = trace.checkpoints.iter().map(|c| c.1).collect();
    if ll.len() < 10 {
        return Err(format!("only {} checkpoints", ll.len()));
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    Ok((mean(&ll[..10]), mean(&ll[ll.len() - 10..])))
}
