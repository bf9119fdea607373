//! Vocabulary, tf-idf weighting and user-profile features.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Message;
use crate::error::{Error, Result};
use crate::text::TokenSeq;

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    terms: Vec<String>,
    df: Vec<u32>,
    n_docs: u32,
}

/// Sorted term list with document frequencies. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    df: Vec<u32>,
    n_docs: u32,
    index: HashMap<String, usize>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        let index = r
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            terms: r.terms,
            df: r.df,
            n_docs: r.n_docs,
            index,
        }
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            terms: v.terms,
            df: v.df,
            n_docs: v.n_docs,
        }
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs as usize
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn df(&self, term: usize) -> u32 {
        self.df[term]
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Smoothed inverse document frequency: `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf(&self, term: usize) -> f64 {
        idf(self.n_docs as f64, self.df[term] as f64)
    }

    /// In-vocabulary token ids of a document, in order.
    pub fn encode(&self, doc: &[String]) -> Vec<u32> {
        doc.iter()
            .filter_map(|t| self.get(t).map(|i| i as u32))
            .collect()
    }

    pub fn content_hash(&self) -> String {
        crate::artifact::content_hash(self)
    }
}

pub fn idf(n_docs: f64, df: f64) -> f64 {
    ((1.0 + n_docs) / (1.0 + df)).ln() + 1.0
}

pub fn build_vocabulary(docs: &[TokenSeq], min_df: usize) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::Validation(
            "cannot build a vocabulary from zero documents".into(),
        ));
    }
    let mut df: BTreeMap<&str, u32> = BTreeMap::new();
    for doc in docs {
        let unique: HashSet<&str> = doc.iter().map(String::as_str).collect();
        for t in unique {
            *df.entry(t).or_default() += 1;
        }
    }
    let (terms, df): (Vec<String>, Vec<u32>) = df
        .into_iter()
        .filter(|&(_, n)| n as usize >= min_df.max(1))
        .map(|(t, n)| (t.to_string(), n))
        .unzip();
    Ok(Vocabulary::from(VocabularyRepr {
        terms,
        df,
        n_docs: docs.len() as u32,
    }))
}

/// Sparse row: (term index, weight) sorted by index.
pub type SparseRow = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: Vec<SparseRow>,
    /// Dense user features appended after the sparse block.
    pub extra: Option<Vec<Vec<f64>>>,
    pub n_terms: usize,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_terms + self.extra.as_ref().and_then(|e| e.first()).map_or(0, Vec::len)
    }

    /// Row `i` as a dense vector: sparse block then user features.
    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_terms];
        for &(j, w) in &self.rows[i] {
            out[j] = w;
        }
        if let Some(extra) = &self.extra {
            out.extend_from_slice(&extra[i]);
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows()).map(|i| self.dense_row(i)).collect()
    }
}

fn tfidf_row(doc: &[String], vocab: &Vocabulary) -> SparseRow {
    let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
    for t in doc {
        if let Some(i) = vocab.get(t) {
            *tf.entry(i).or_default() += 1.0;
        }
    }
    let mut row: SparseRow = tf.into_iter().map(|(i, c)| (i, c * vocab.idf(i))).collect();
    let norm = row.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, w) in &mut row {
            *w /= norm;
        }
    }
    row
}

/// Raw term counts times smoothed idf, L2-normalized per row. Unknown tokens
/// are ignored.
pub fn tfidf_transform(docs: &[TokenSeq], vocab: &Vocabulary) -> FeatureMatrix {
    FeatureMatrix {
        rows: docs.par_iter().map(|d| tfidf_row(d, vocab)).collect(),
        extra: None,
        n_terms: vocab.len(),
    }
}

/// `[ln(1 + followers), ln(1 + friends)]`.
pub fn user_features(message: &Message) -> Result<[f64; 2]> {
    if message.followers < 0 || message.friends < 0 {
        return Err(Error::Validation(format!(
            "message {:?} has negative follower/friend counts",
            message.id
        )));
    }
    Ok([
        (message.followers as f64).ln_1p(),
        (message.friends as f64).ln_1p(),
    ])
}

pub fn append_user_features(matrix: FeatureMatrix, messages: &[Message]) -> Result<FeatureMatrix> {
    if matrix.n_rows() != messages.len() {
        return Err(Error::Validation(format!(
            "{} feature rows but {} messages",
            matrix.n_rows(),
            messages.len()
        )));
    }
    let extra = messages
        .iter()
        .map(|m| user_features(m).map(|f| f.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureMatrix {
        extra: Some(extra),
        ..matrix
    })
}
