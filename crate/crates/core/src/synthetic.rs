//! Labeled synthetic corpora for demos and trend checks.
//!
//! Relevant messages draw most tokens from a small earthquake lexicon and
//! non-relevant ones from a larger lexicon of pronounceable pseudo-words. A
//! fixed fraction of each message's tokens comes from the other class's
//! lexicon.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label, Message};
use crate::seed::{self, Rng};
use crate::text::stem_word;

pub const QUAKE_LEXICON: [&str; 50] = [
    "terremoto", "sismo", "temblor", "réplica", "magnitud", "epicentro", "tsunami", "alerta",
    "evacuación", "daños", "heridos", "fallecidos", "víctimas", "derrumbe", "escombros", "rescate",
    "bomberos", "emergencia", "onemi", "desaparecidos", "refugio", "albergue", "ayuda",
    "damnificados", "colapso", "edificio", "puente", "carretera", "incendio", "electricidad",
    "agua", "ola", "costa", "marejada", "cerro", "suministro", "hospital", "socorro", "brigada",
    "catástrofe", "devastación", "grietas", "intensidad", "richter", "sirena", "cruz", "roja",
    "voluntarios", "víveres", "carpas",
];

/// 2010-02-27T00:00:00Z
pub const BASE_TIMESTAMP: i64 = 1_267_228_800;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub relevant: usize,
    pub non_relevant: usize,
    pub pool: usize,
    pub other_words: usize,
    /// Probability that a token comes from the other class's lexicon.
    pub overlap: f64,
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub days: usize,
    /// Three rater labels per message, each flipped with this probability.
    pub rater_flip: Option<f64>,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            relevant: 1000,
            non_relevant: 3000,
            pool: 3000,
            other_words: 200,
            overlap: 0.2,
            min_tokens: 6,
            max_tokens: 14,
            days: 4,
            rater_flip: None,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub corpus: Corpus,
    pub pool: Corpus,
}

/// `n` pseudo-words whose stems differ from each other and from every
/// earthquake-lexicon stem.
pub fn other_lexicon(n: usize) -> Vec<String> {
    const ONSETS: [&str; 14] = ["b", "c", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v", "ch"];
    const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
    let mut rng = seed::rng(0x1e41c0);
    let mut stems: HashSet<String> = QUAKE_LEXICON.iter().map(|w| stem_word(w)).collect();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.gen_range(2..=4);
        let word: String = (0..syllables)
            .map(|_| format!("{}{}", ONSETS.choose(&mut rng).unwrap(), VOWELS.choose(&mut rng).unwrap()))
            .collect();
        if stems.insert(stem_word(&word)) {
            out.push(word);
        }
    }
    out
}

fn message_text(rng: &mut Rng, own: &[String], other: &[String], spec: &SyntheticSpec) -> String {
    let n = rng.gen_range(spec.min_tokens..=spec.max_tokens);
    (0..n)
        .map(|_| {
            let lexicon = if rng.gen_bool(spec.overlap) { other } else { own };
            let w = lexicon.choose(rng).unwrap();
            if rng.gen_bool(0.1) {
                format!("#{w}")
            } else {
                w.clone()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn user_counts(rng: &mut Rng) -> (i64, i64) {
    let f = 10f64.powf(rng.gen_range(0.0..4.0)) as i64;
    let g = 10f64.powf(rng.gen_range(0.0..3.0)) as i64;
    (f, g)
}

pub fn generate(spec: &SyntheticSpec) -> SyntheticData {
    let quake: Vec<String> = QUAKE_LEXICON.iter().map(|w| w.to_string()).collect();
    let other = other_lexicon(spec.other_words);
    let mut rng = seed::stage_rng(spec.seed, "synthetic", &[]);
    let span = 86_400 * spec.days.max(1) as i64;

    let make = |prefix: &str, i: usize, relevant: bool, rng: &mut Rng| {
        let (own, oth) = if relevant { (&quake, &other) } else { (&other, &quake) };
        let text = message_text(rng, own, oth, spec);
        let (followers, friends) = user_counts(rng);
        let ts = BASE_TIMESTAMP + rng.gen_range(0..span);
        let gold = Label::from_relevant(relevant);
        let mut m = Message::new(format!("{prefix}{i}"), ts, text)
            .with_user(followers, friends)
            .with_gold(gold);
        if let Some(p) = spec.rater_flip {
            m.labels = Some(
                (0..3)
                    .map(|_| if rng.gen_bool(p) { Label::from_relevant(!relevant) } else { gold })
                    .collect(),
            );
        }
        m
    };

    let mut messages = Vec::with_capacity(spec.relevant + spec.non_relevant);
    for i in 0..spec.relevant {
        messages.push(make("r", i, true, &mut rng));
    }
    for i in 0..spec.non_relevant {
        messages.push(make("n", i, false, &mut rng));
    }
    messages.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
    let mut pool: Vec<Message> = (0..spec.pool)
        .map(|i| {
            let mut m = make("p", i, false, &mut rng);
            m.gold = None;
            m.labels = None;
            m
        })
        .collect();
    pool.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
    SyntheticData {
        corpus: Corpus::new(messages, format!("synthetic(seed={})", spec.seed)),
        pool: Corpus::new(pool, format!("synthetic pool(seed={})", spec.seed)),
    }
}
