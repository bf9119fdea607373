//! Latent Dirichlet allocation by collapsed Gibbs sampling.
//!
//! Training runs one sequential chain over token-topic assignments. The
//! topic-word distributions are estimated from the final counts with beta
//! smoothing. Unseen documents are folded in against the frozen
//! distributions, so documents with previously unobserved words still get a
//! topic vector.

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::features::Vocabulary;
use crate::seed::{self, Rng};
use crate::text::TokenSeq;

pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_SWEEPS: usize = 1000;
pub const DEFAULT_INFER_SWEEPS: usize = 100;
pub const CHECKPOINT_EVERY: usize = 50;

/// The usual `50 / T` document-topic prior.
pub fn default_alpha(topics: usize) -> f64 {
    50.0 / topics as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub topics: usize,
    /// `None` means `50 / topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub sweeps: usize,
    pub seed: u64,
    /// Number of final sweeps whose topic-word estimates are averaged. `1`
    /// keeps only the final sample.
    pub average_last: usize,
}

impl LdaParams {
    pub fn new(topics: usize, seed: u64) -> Self {
        LdaParams {
            topics,
            alpha: None,
            beta: DEFAULT_BETA,
            sweeps: DEFAULT_SWEEPS,
            seed,
            average_last: 1,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or_else(|| default_alpha(self.topics))
    }
}

#[derive(Serialize, Deserialize)]
struct TopicModelRepr {
    topics: usize,
    vocab_size: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
    vocab_hash: String,
    /// Row-major `topics x vocab_size`.
    phi: Vec<f64>,
}

/// Trained topic-word distributions plus the priors needed for inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "TopicModelRepr", into = "TopicModelRepr")]
pub struct TopicModel {
    topics: usize,
    vocab_size: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
    vocab_hash: String,
    phi: Vec<f64>,
    // word-major copy of phi for the inference inner loop
    phi_by_word: Vec<f64>,
}

fn transpose(phi: &[f64], topics: usize, vocab: usize) -> Vec<f64> {
    let mut out = vec![0.0; phi.len()];
    for k in 0..topics {
        for w in 0..vocab {
            out[w * topics + k] = phi[k * vocab + w];
        }
    }
    out
}

impl From<TopicModelRepr> for TopicModel {
    fn from(r: TopicModelRepr) -> Self {
        let phi_by_word = transpose(&r.phi, r.topics, r.vocab_size);
        TopicModel {
            topics: r.topics,
            vocab_size: r.vocab_size,
            alpha: r.alpha,
            beta: r.beta,
            seed: r.seed,
            vocab_hash: r.vocab_hash,
            phi: r.phi,
            phi_by_word,
        }
    }
}

impl From<TopicModel> for TopicModelRepr {
    fn from(m: TopicModel) -> Self {
        TopicModelRepr {
            topics: m.topics,
            vocab_size: m.vocab_size,
            alpha: m.alpha,
            beta: m.beta,
            seed: m.seed,
            vocab_hash: m.vocab_hash,
            phi: m.phi,
        }
    }
}

impl TopicModel {
    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn vocab_hash(&self) -> &str {
        &self.vocab_hash
    }

    /// Topic `k`'s distribution over the vocabulary.
    pub fn phi(&self, k: usize) -> &[f64] {
        &self.phi[k * self.vocab_size..(k + 1) * self.vocab_size]
    }

    pub fn content_hash(&self) -> String {
        crate::artifact::content_hash(self)
    }
}

/// Length-T topic proportions summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TopicVector(pub Vec<f64>);

/// Training log-likelihood `log p(w | z)` recorded every
/// [`CHECKPOINT_EVERY`] sweeps, starting from the random initialization.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrainTrace {
    pub checkpoints: Vec<(usize, f64)>,
}

struct Sampler<'a> {
    docs: &'a [Vec<u32>],
    topics: usize,
    vocab: usize,
    alpha: f64,
    beta: f64,
    assignments: Vec<Vec<u32>>,
    doc_topic: Vec<u32>,
    word_topic: Vec<u32>,
    topic_total: Vec<u32>,
}

impl<'a> Sampler<'a> {
    fn init(docs: &'a [Vec<u32>], topics: usize, vocab: usize, alpha: f64, beta: f64, rng: &mut Rng) -> Self {
        let mut s = Sampler {
            docs,
            topics,
            vocab,
            alpha,
            beta,
            assignments: Vec::with_capacity(docs.len()),
            doc_topic: vec![0; docs.len() * topics],
            word_topic: vec![0; vocab * topics],
            topic_total: vec![0; topics],
        };
        for (d, doc) in docs.iter().enumerate() {
            let z: Vec<u32> = doc
                .iter()
                .map(|&w| {
                    let k = rng.gen_range(0..topics);
                    s.doc_topic[d * topics + k] += 1;
                    s.word_topic[w as usize * topics + k] += 1;
                    s.topic_total[k] += 1;
                    k as u32
                })
                .collect();
            s.assignments.push(z);
        }
        s
    }

    fn sweep(&mut self, rng: &mut Rng, weights: &mut [f64]) {
        let t = self.topics;
        let vbeta = self.vocab as f64 * self.beta;
        for (d, doc) in self.docs.iter().enumerate() {
            let dt = &mut self.doc_topic[d * t..(d + 1) * t];
            for (i, &w) in doc.iter().enumerate() {
                let w = w as usize;
                let old = self.assignments[d][i] as usize;
                let wt = &mut self.word_topic[w * t..(w + 1) * t];
                dt[old] -= 1;
                wt[old] -= 1;
                self.topic_total[old] -= 1;

                let mut acc = 0.0;
                for k in 0..t {
                    acc += (dt[k] as f64 + self.alpha) * (wt[k] as f64 + self.beta)
                        / (self.topic_total[k] as f64 + vbeta);
                    weights[k] = acc;
                }
                let new = draw(weights, acc, rng);

                dt[new] += 1;
                wt[new] += 1;
                self.topic_total[new] += 1;
                self.assignments[d][i] = new as u32;
            }
        }
    }

    /// `log p(w | z)` with phi integrated out.
    fn log_likelihood(&self) -> f64 {
        let v = self.vocab as f64;
        let lg_beta = ln_gamma(self.beta);
        let mut ll = self.topics as f64 * ln_gamma(v * self.beta);
        for k in 0..self.topics {
            ll -= ln_gamma(self.topic_total[k] as f64 + v * self.beta);
        }
        for &n in &self.word_topic {
            if n > 0 {
                ll += ln_gamma(n as f64 + self.beta) - lg_beta;
            }
        }
        ll
    }

    fn accumulate_phi(&self, into: &mut [f64]) {
        let vbeta = self.vocab as f64 * self.beta;
        for k in 0..self.topics {
            let denom = self.topic_total[k] as f64 + vbeta;
            for w in 0..self.vocab {
                into[k * self.vocab + w] +=
                    (self.word_topic[w * self.topics + k] as f64 + self.beta) / denom;
            }
        }
    }
}

/// Index of the first cumulative weight exceeding a uniform draw on
/// `[0, total)`.
fn draw(cumulative: &[f64], total: f64, rng: &mut Rng) -> usize {
    let u = rng.gen::<f64>() * total;
    cumulative
        .partition_point(|&c| c <= u)
        .min(cumulative.len() - 1)
}

pub fn lda_train(docs: &[TokenSeq], vocab: &Vocabulary, params: &LdaParams) -> Result<TopicModel> {
    lda_train_traced(docs, vocab, params).map(|(m, _)| m)
}

pub fn lda_train_traced(
    docs: &[TokenSeq],
    vocab: &Vocabulary,
    params: &LdaParams,
) -> Result<(TopicModel, TrainTrace)> {
    let encoded: Vec<Vec<u32>> = docs.iter().map(|d| vocab.encode(d)).collect();
    let (phi, trace) = train_encoded(&encoded, vocab.len(), params)?;
    let model = TopicModelRepr {
        topics: params.topics,
        vocab_size: vocab.len(),
        alpha: params.alpha(),
        beta: params.beta,
        seed: params.seed,
        vocab_hash: vocab.content_hash(),
        phi,
    };
    Ok((model.into(), trace))
}

fn train_encoded(docs: &[Vec<u32>], vocab: usize, params: &LdaParams) -> Result<(Vec<f64>, TrainTrace)> {
    let t = params.topics;
    if t < 1 {
        return Err(Error::Validation("number of topics must be at least 1".into()));
    }
    if vocab == 0 {
        return Err(Error::Validation("cannot fit topics over an empty vocabulary".into()));
    }
    if docs.iter().all(Vec::is_empty) {
        return Err(Error::Validation(
            "topic training needs at least one document with in-vocabulary tokens".into(),
        ));
    }
    let alpha = params.alpha();
    if !(alpha > 0.0 && params.beta > 0.0) {
        return Err(Error::Validation("topic priors must be positive".into()));
    }

    let mut rng = seed::rng(params.seed);
    let mut sampler = Sampler::init(docs, t, vocab, alpha, params.beta, &mut rng);
    let mut weights = vec![0.0; t];
    let mut trace = TrainTrace::default();
    trace.checkpoints.push((0, sampler.log_likelihood()));

    let average = params.average_last.clamp(1, params.sweeps.max(1));
    let mut phi = vec![0.0; t * vocab];
    for sweep in 1..=params.sweeps {
        sampler.sweep(&mut rng, &mut weights);
        if sweep % CHECKPOINT_EVERY == 0 {
            trace.checkpoints.push((sweep, sampler.log_likelihood()));
        }
        if sweep + average > params.sweeps {
            sampler.accumulate_phi(&mut phi);
        }
    }
    if params.sweeps == 0 {
        sampler.accumulate_phi(&mut phi);
    } else if average > 1 {
        phi.iter_mut().for_each(|p| *p /= average as f64);
    }
    Ok((phi, trace))
}

/// Fold-in inference for one document. Topic-word distributions stay fixed;
/// only this document's assignments are sampled.
pub fn lda_infer(model: &TopicModel, vocab: &Vocabulary, doc: &TokenSeq, sweeps: usize, seed: u64) -> Result<TopicVector> {
    if vocab.len() != model.vocab_size {
        return Err(Error::Incompatible(format!(
            "topic model covers {} terms, vocabulary has {}",
            model.vocab_size,
            vocab.len()
        )));
    }
    Ok(infer_encoded(model, &vocab.encode(doc), sweeps, seed))
}

pub fn infer_encoded(model: &TopicModel, ids: &[u32], sweeps: usize, seed: u64) -> TopicVector {
    let t = model.topics;
    let alpha = model.alpha;
    let mut counts = vec![0u32; t];
    if !ids.is_empty() {
        let mut rng = seed::rng(seed);
        let mut z: Vec<usize> = ids
            .iter()
            .map(|_| {
                let k = rng.gen_range(0..t);
                counts[k] += 1;
                k
            })
            .collect();
        let mut weights = vec![0.0; t];
        for _ in 0..sweeps {
            for (i, &w) in ids.iter().enumerate() {
                let phi_w = &model.phi_by_word[w as usize * t..(w as usize + 1) * t];
                counts[z[i]] -= 1;
                let mut acc = 0.0;
                for k in 0..t {
                    acc += (counts[k] as f64 + alpha) * phi_w[k];
                    weights[k] = acc;
                }
                let k = draw(&weights, acc, &mut rng);
                counts[k] += 1;
                z[i] = k;
            }
        }
    }
    let denom = ids.len() as f64 + t as f64 * alpha;
    TopicVector(counts.iter().map(|&c| (c as f64 + alpha) / denom).collect())
}
