//! Persisted model artifacts and their content hashes.
//!
//! An artifact bundles the fitted featurization pipeline with a trained
//! classifier. Hashes of the vocabulary and topic model are stored beside
//! them and re-checked on load, so a classifier is never applied to vectors
//! from a pipeline it was not trained with.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Label, Message};
use crate::error::{Error, Result};
use crate::models::TrainedClassifier;
use crate::pipeline::Pipeline;
use crate::text::analyze;

pub const FORMAT: &str = "quakefilter-model";
pub const VERSION: u32 = 1;

/// SHA-256 hex digest of a value's canonical JSON encoding.
pub fn content_hash<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("artifact types always serialize");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format: String,
    pub version: u32,
    pub vocab_hash: Option<String>,
    pub topic_hash: Option<String>,
    /// Absent for the keyword baseline, which reads tokens directly.
    pub pipeline: Option<Pipeline>,
    pub classifier: TrainedClassifier,
}

impl ModelArtifact {
    pub fn new(pipeline: Option<Pipeline>, classifier: TrainedClassifier) -> Result<Self> {
        if classifier.kind().uses_features() {
            let p = pipeline.as_ref().ok_or_else(|| {
                Error::Incompatible(format!("{} needs a featurization pipeline", classifier.kind()))
            })?;
            if p.dim() != classifier.dim {
                return Err(Error::DimensionMismatch {
                    expected: classifier.dim,
                    found: p.dim(),
                });
            }
        }
        Ok(ModelArtifact {
            format: FORMAT.to_string(),
            version: VERSION,
            vocab_hash: pipeline.as_ref().map(|p| p.vocabulary.content_hash()),
            topic_hash: pipeline
                .as_ref()
                .and_then(|p| p.topic_model.as_ref())
                .map(|m| m.content_hash()),
            pipeline,
            classifier,
        })
    }

    /// Re-derives every stored hash and the pipeline/classifier dimensions.
    pub fn verify(&self) -> Result<()> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(Error::Incompatible(format!(
                "unsupported artifact {} v{}",
                self.format, self.version
            )));
        }
        let p = match (&self.pipeline, self.classifier.kind().uses_features()) {
            (None, false) => return Ok(()),
            (None, true) => {
                return Err(Error::Incompatible("artifact has no featurization pipeline".into()))
            }
            (Some(p), _) => p,
        };
        if self.vocab_hash.as_deref() != Some(p.vocabulary.content_hash().as_str()) {
            return Err(Error::Incompatible("vocabulary hash mismatch".into()));
        }
        let topic_hash = p.topic_model.as_ref().map(|m| m.content_hash());
        if self.topic_hash != topic_hash {
            return Err(Error::Incompatible("topic model hash mismatch".into()));
        }
        p.check_consistent()?;
        if self.classifier.kind().uses_features() && p.dim() != self.classifier.dim {
            return Err(Error::Incompatible(format!(
                "pipeline yields {} features, classifier expects {}",
                p.dim(),
                self.classifier.dim
            )));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_vec(self)?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let artifact: ModelArtifact = serde_json::from_slice(&bytes)
            .map_err(|e| Error::Incompatible(format!("{}: {e}", path.display())))?;
        artifact.verify()?;
        Ok(artifact)
    }

    /// Relevance score and label for one message.
    pub fn classify(&self, message: &Message) -> Result<(f64, Label)> {
        let tokens = analyze(&message.text);
        let score = match &self.pipeline {
            Some(p) if self.classifier.kind().uses_features() => {
                self.classifier.score(&p.vectorize(message, &tokens)?)?
            }
            _ => self.classifier.score_tokens(std::slice::from_ref(&tokens))?[0].0,
        };
        Ok((score, self.classifier.label(score)))
    }
}
