//! Tweet text to stemmed tokens: hashtags, mentions and words only.

mod stemmer;

use std::ops::Deref;

use serde::{Deserialize, Serialize};

pub use stemmer::stem as stem_word;

/// Ordered lowercase tokens. Hashtags and mentions keep their sigil.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSeq(pub Vec<String>);

impl TokenSeq {
    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

impl Deref for TokenSeq {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSeq {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        TokenSeq(iter.into_iter().map(Into::into).collect())
    }
}

fn is_sigil(c: char) -> bool {
    c == '#' || c == '@'
}

/// Links never survive: anything with a scheme, `http` inside, or a `www.`
/// prefix.
fn is_url(token: &str) -> bool {
    token.starts_with("www.") || token.contains("http") || token.contains("://")
}

/// Strips surrounding punctuation, keeping one leading `#`/`@` when it sits
/// directly before the first alphanumeric character.
fn clean(raw: &str) -> Option<String> {
    let trimmed_end = raw.trim_end_matches(|c: char| !c.is_alphanumeric());
    let body_start = trimmed_end.find(char::is_alphanumeric)?;
    let body = &trimmed_end[body_start..];
    let sigil = trimmed_end[..body_start].chars().next_back().filter(|&c| is_sigil(c));
    let mut token = String::with_capacity(body.len() + 1);
    if let Some(s) = sigil {
        token.push(s);
    }
    token.push_str(body);
    Some(token)
}

pub fn tokenize(text: &str) -> TokenSeq {
    text.to_lowercase()
        .split_whitespace()
        .filter(|raw| !is_url(raw))
        .filter_map(clean)
        .filter(|t| !is_url(t))
        .collect()
}

/// Stems each token; hashtags and mentions are stemmed after their sigil.
pub fn stem_spanish(tokens: &TokenSeq) -> TokenSeq {
    tokens
        .iter()
        .map(|t| match t.chars().next() {
            Some(c) if is_sigil(c) => {
                let tail = &t[c.len_utf8()..];
                format!("{c}{}", stem_word(tail))
            }
            _ => stem_word(t),
        })
        .collect()
}

/// Tokenize then stem: the full text pipeline.
pub fn analyze(text: &str) -> TokenSeq {
    stem_spanish(&tokenize(text))
}
