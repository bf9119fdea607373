//! Featurization chain shared by experiments, tuning and batch
//! classification: tokens to vocabulary to topic proportions, plus optional
//! user features.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Message;
use crate::error::{Error, Result};
use crate::features::{self, build_vocabulary, Vocabulary};
use crate::seed;
use crate::text::{analyze, TokenSeq};
use crate::topics::{self, infer_encoded, LdaParams, TopicModel};

/// Feature space the Bernoulli naive Bayes model is trained in.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NbFeatures {
    #[default]
    Topics,
    Tfidf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub min_df: usize,
    pub user_features: bool,
    pub nb_features: NbFeatures,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            min_df: 1,
            user_features: true,
            nb_features: NbFeatures::Topics,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaConfig {
    /// Defaults to `50 / T`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub sweeps: usize,
    pub infer_sweeps: usize,
    pub average_last: usize,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            alpha: None,
            beta: topics::DEFAULT_BETA,
            sweeps: topics::DEFAULT_SWEEPS,
            infer_sweeps: topics::DEFAULT_INFER_SWEEPS,
            average_last: 1,
        }
    }
}

/// A fitted featurizer. With `topic_model` absent the pipeline produces
/// dense tf-idf rows instead of topic proportions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub vocabulary: Vocabulary,
    pub topic_model: Option<TopicModel>,
    pub user_features: bool,
    pub infer_sweeps: usize,
    /// Root of the per-message inference seeds.
    pub seed: u64,
}

impl Pipeline {
    /// Fits the vocabulary and, when `dims` is given, an LDA model on the
    /// training documents.
    pub fn fit(
        train: &[TokenSeq],
        dims: Option<usize>,
        features: &FeatureConfig,
        lda: &LdaConfig,
        seed: u64,
    ) -> Result<Pipeline> {
        let vocabulary = build_vocabulary(train, features.min_df)?;
        let topic_model = match dims {
            Some(t) => {
                let params = LdaParams {
                    topics: t,
                    alpha: lda.alpha,
                    beta: lda.beta,
                    sweeps: lda.sweeps,
                    seed: seed::derive_seed(seed, "lda", &[t as u64]),
                    average_last: lda.average_last,
                };
                Some(topics::lda_train(train, &vocabulary, &params)?)
            }
            None => None,
        };
        Ok(Pipeline {
            vocabulary,
            topic_model,
            user_features: features.user_features,
            infer_sweeps: lda.infer_sweeps,
            seed,
        })
    }

    pub fn dim(&self) -> usize {
        let base = self
            .topic_model
            .as_ref()
            .map_or(self.vocabulary.len(), TopicModel::topics);
        base + if self.user_features { 2 } else { 0 }
    }

    /// Fold-in seed for one message: depends only on the pipeline seed and
    /// the message id, so a message gets the same vector wherever it is
    /// scored.
    pub fn message_seed(&self, id: &str) -> u64 {
        seed::derive_seed(self.seed, &format!("infer:{id}"), &[])
    }

    pub fn vectorize(&self, message: &Message, tokens: &TokenSeq) -> Result<Vec<f64>> {
        let mut v = match &self.topic_model {
            Some(m) => {
                let ids = self.vocabulary.encode(tokens);
                infer_encoded(m, &ids, self.infer_sweeps, self.message_seed(&message.id)).0
            }
            None => {
                let row = features::tfidf_transform(std::slice::from_ref(tokens), &self.vocabulary);
                row.dense_row(0)
            }
        };
        if self.user_features {
            v.extend(features::user_features(message)?);
        }
        Ok(v)
    }

    pub fn vectorize_text(&self, message: &Message) -> Result<Vec<f64>> {
        self.vectorize(message, &analyze(&message.text))
    }

    pub fn transform(&self, messages: &[Message], tokens: &[TokenSeq]) -> Result<Vec<Vec<f64>>> {
        if messages.len() != tokens.len() {
            return Err(Error::Validation(format!(
                "{} messages but {} token sequences",
                messages.len(),
                tokens.len()
            )));
        }
        messages
            .par_iter()
            .zip(tokens)
            .map(|(m, t)| self.vectorize(m, t))
            .collect()
    }

    /// Checks that the topic model was trained over this vocabulary.
    pub fn check_consistent(&self) -> Result<()> {
        if let Some(m) = &self.topic_model {
            let hash = self.vocabulary.content_hash();
            if m.vocab_hash() != hash || m.vocab_size() != self.vocabulary.len() {
                return Err(Error::Incompatible(
                    "topic model was trained over a different vocabulary".into(),
                ));
            }
        }
        Ok(())
    }
}
