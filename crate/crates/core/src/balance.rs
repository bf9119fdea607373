//! Noise injection and borderline-SMOTE oversampling.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label, Message};
use crate::error::{Error, Result};
use crate::seed;

pub const DEFAULT_M_NEIGHBORS: usize = 5;
pub const DEFAULT_K_NEIGHBORS: usize = 5;

/// Dense training rows. Synthetic rows come last and remember the
/// `(sample, neighbor)` pair they were interpolated from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabeledVectors {
    pub vectors: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    pub synthetic: Vec<bool>,
    pub parents: Vec<Option<(usize, usize)>>,
}

impl LabeledVectors {
    pub fn new(vectors: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::Validation(format!(
                "{} vectors but {} labels",
                vectors.len(),
                labels.len()
            )));
        }
        if let Some(first) = vectors.first() {
            if let Some(bad) = vectors.iter().find(|v| v.len() != first.len()) {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    found: bad.len(),
                });
            }
        }
        let n = vectors.len();
        Ok(LabeledVectors {
            vectors,
            labels,
            synthetic: vec![false; n],
            parents: vec![None; n],
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn n_synthetic(&self) -> usize {
        self.synthetic.iter().filter(|&&s| s).count()
    }
}

/// Number of noise messages for a given proportion of the ground truth.
pub fn noise_count(train_len: usize, proportion: f64) -> usize {
    // the epsilon keeps 0.29 * 100 from flooring to 28
    (proportion * train_len as f64 + 1e-9).floor() as usize
}

/// Appends `floor(proportion * |train|)` pool messages, labeled
/// non-relevant, after the original training messages.
pub fn inject_noise(train: &Corpus, pool: &Corpus, proportion: f64, seed: u64) -> Result<Corpus> {
    if !(0.0..=1.0).contains(&proportion) {
        return Err(Error::Validation(format!(
            "noise proportion {proportion} outside [0, 1]"
        )));
    }
    let required = noise_count(train.len(), proportion);
    if required == 0 {
        return Ok(train.clone());
    }
    if required > pool.len() {
        return Err(Error::PoolTooSmall {
            required,
            available: pool.len(),
        });
    }
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.shuffle(&mut seed::rng(seed));
    let step = pool.len() / required;
    let mut messages = train.messages.clone();
    messages.extend((0..required).map(|j| {
        let m = &pool.messages[order[j * step]];
        Message {
            labels: None,
            gold: Some(Label::NonRelevant),
            ..m.clone()
        }
    }));
    let out = Corpus::new(
        messages,
        format!("{} | noise({proportion}, {required})", train.provenance),
    );
    out.check_unique_ids()?;
    Ok(out)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indexes of the `k` nearest candidates to `query`, nearest first, ties
/// broken by index.
fn nearest(vectors: &[Vec<f64>], query: usize, candidates: &[usize], k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = candidates
        .iter()
        .filter(|&&c| c != query)
        .map(|&c| (sq_dist(&vectors[query], &vectors[c]), c))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    let k = k.min(d.len());
    if k < d.len() {
        d.select_nth_unstable_by(k, cmp);
        d.truncate(k);
    }
    d.sort_unstable_by(cmp);
    d.into_iter().map(|(_, c)| c).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Borderline {
    Safe,
    Danger,
    Noise,
}

/// Classifies every minority sample by how many of its `m` nearest
/// neighbors (over all samples) are majority.
pub fn borderline_status(data: &LabeledVectors, m: usize) -> Vec<(usize, Borderline)> {
    let all: Vec<usize> = (0..data.len()).collect();
    all.par_iter()
        .filter(|&&i| data.labels[i].is_relevant())
        .map(|&i| {
            let nn = nearest(&data.vectors, i, &all, m);
            let majority = nn.iter().filter(|&&j| !data.labels[j].is_relevant()).count();
            let status = if !nn.is_empty() && majority == nn.len() {
                Borderline::Noise
            } else if 2 * majority > nn.len() {
                Borderline::Danger
            } else {
                Borderline::Safe
            };
            (i, status)
        })
        .collect()
}

/// Borderline-SMOTE1 with the relevant class as minority. Synthesizes until
/// both classes have equal counts.
pub fn borderline_smote(data: &LabeledVectors, m: usize, k: usize, seed: u64) -> Result<LabeledVectors> {
    if m == 0 || k == 0 {
        return Err(Error::Validation("neighbor counts must be positive".into()));
    }
    let n_min = data.count(Label::Relevant);
    let n_maj = data.len() - n_min;
    if n_min >= n_maj {
        return Ok(data.clone());
    }
    if n_min < k + 1 {
        return Err(Error::TooFewMinority {
            required: k + 1,
            found: n_min,
        });
    }

    let status = borderline_status(data, m);
    let pick = |s: Borderline| -> Vec<usize> {
        status.iter().filter(|(_, st)| *st == s).map(|&(i, _)| i).collect()
    };
    let mut seeds = pick(Borderline::Danger);
    if seeds.is_empty() {
        seeds = status
            .iter()
            .filter(|(_, st)| *st != Borderline::Noise)
            .map(|&(i, _)| i)
            .collect();
    }
    if seeds.is_empty() {
        seeds = status.iter().map(|&(i, _)| i).collect();
    }

    // NOISE samples are not interpolation partners either, unless fewer
    // than two others remain.
    let mut partners = pick(Borderline::Danger);
    partners.extend(pick(Borderline::Safe));
    partners.sort_unstable();
    if partners.len() < 2 {
        partners = status.iter().map(|&(i, _)| i).collect();
    }
    let neighbors: Vec<Vec<usize>> = seeds
        .par_iter()
        .map(|&p| nearest(&data.vectors, p, &partners, k))
        .collect();

    let mut rng = seed::rng(seed);
    let mut out = data.clone();
    for j in 0..n_maj - n_min {
        let slot = j % seeds.len();
        let p = seeds[slot];
        let q = *neighbors[slot].choose(&mut rng).expect("k >= 1 minority neighbors");
        let delta: f64 = rng.gen();
        let (vp, vq) = (&data.vectors[p], &data.vectors[q]);
        let s = vp.iter().zip(vq).map(|(a, b)| a + delta * (b - a)).collect();
        out.vectors.push(s);
        out.labels.push(Label::Relevant);
        out.synthetic.push(true);
        out.parents.push(Some((p, q)));
    }
    Ok(out)
}
