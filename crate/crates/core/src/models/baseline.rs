use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::text::TokenSeq;

/// Snowball stem of "terremoto".
pub const KEYWORD_STEM: &str = "terremot";

/// Keyword-presence classifier over stemmed tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub stem: String,
}

impl Default for Baseline {
    fn default() -> Self {
        Baseline {
            stem: KEYWORD_STEM.to_string(),
        }
    }
}

impl Baseline {
    pub fn matches(&self, tokens: &[String]) -> bool {
        tokens
            .iter()
            .any(|t| t.strip_prefix('#').unwrap_or(t) == self.stem)
    }

    pub fn score(&self, tokens: &[String]) -> f64 {
        if self.matches(tokens) {
            1.0
        } else {
            0.0
        }
    }
}

pub fn baseline_classify(messages: &[TokenSeq]) -> Vec<Label> {
    let b = Baseline::default();
    messages
        .iter()
        .map(|m| Label::from_relevant(b.matches(m)))
        .collect()
}
