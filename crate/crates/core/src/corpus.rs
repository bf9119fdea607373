//! Message corpora: ingestion, systematic sampling, near-duplicate removal
//! and seismic-window filtering of the noise pool.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "relevant")]
    Relevant,
    #[serde(rename = "non-relevant")]
    NonRelevant,
}

impl Label {
    pub fn is_relevant(self) -> bool {
        self == Label::Relevant
    }

    pub fn from_relevant(relevant: bool) -> Self {
        if relevant {
            Label::Relevant
        } else {
            Label::NonRelevant
        }
    }

    /// Numeric coding used by ICC and the linear models: relevant = 1.
    pub fn as_f64(self) -> f64 {
        if self.is_relevant() {
            1.0
        } else {
            0.0
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Relevant => "relevant",
            Label::NonRelevant => "non-relevant",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "relevant" => Ok(Label::Relevant),
            "non-relevant" => Ok(Label::NonRelevant),
            other => Err(format!(
                "unknown label {other:?} (expected \"relevant\" or \"non-relevant\")"
            )),
        }
    }
}

/// One tweet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub id: String,
    #[serde(default)]
    pub timestamp: i64,
    pub text: String,
    #[serde(default)]
    pub followers: i64,
    #[serde(default)]
    pub friends: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Label>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<Label>,
}

impl Message {
    pub fn new(id: impl Into<String>, timestamp: i64, text: impl Into<String>) -> Self {
        Message {
            id: id.into(),
            timestamp,
            text: text.into(),
            followers: 0,
            friends: 0,
            labels: None,
            gold: None,
        }
    }

    pub fn with_gold(mut self, gold: Label) -> Self {
        self.gold = Some(gold);
        self
    }

    pub fn with_user(mut self, followers: i64, friends: i64) -> Self {
        self.followers = followers;
        self.friends = friends;
        self
    }

    /// UTC day index, the default stratum for systematic sampling.
    pub fn day(&self) -> i64 {
        self.timestamp.div_euclid(SECONDS_PER_DAY)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub messages: Vec<Message>,
    pub provenance: String,
}

impl Corpus {
    pub fn new(messages: Vec<Message>, provenance: impl Into<String>) -> Self {
        Corpus {
            messages,
            provenance: provenance.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    fn derived(&self, messages: Vec<Message>, stage: &str) -> Corpus {
        Corpus {
            messages,
            provenance: format!("{} | {stage}", self.provenance),
        }
    }

    /// Fails on the first repeated id.
    pub fn check_unique_ids(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.messages.len());
        for m in &self.messages {
            if !seen.insert(m.id.as_str()) {
                return Err(Error::Validation(format!("duplicate message id {:?}", m.id)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeismicEvent {
    pub event_time: i64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
}

impl Format {
    /// Guess from the file extension; anything not `.csv` is JSONL.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Jsonl,
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown corpus format {other:?}")),
        }
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<serde_json::Value>,
    #[serde(default)]
    timestamp: Option<i64>,
    text: Option<String>,
    #[serde(default)]
    followers: Option<i64>,
    #[serde(default)]
    friends: Option<i64>,
    #[serde(default)]
    labels: Option<Vec<String>>,
    #[serde(default)]
    gold: Option<String>,
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_labels<'a>(
    items: impl IntoIterator<Item = &'a str>,
    path: &Path,
    line: u64,
) -> Result<Vec<Label>> {
    items
        .into_iter()
        .map(|s| s.parse::<Label>().map_err(|e| parse_error(path, line, e)))
        .collect()
}

/// Parses one JSONL line. Shared by corpus loading and streaming
/// classification.
pub fn parse_jsonl_record(line: &str, path: &Path, line_no: u64) -> Result<Message> {
    let raw: RawRecord = serde_json::from_str(line)
        .map_err(|e| parse_error(path, line_no, format!("malformed JSON record: {e}")))?;
    let id = match raw.id {
        Some(serde_json::Value::String(s)) => s,
        Some(serde_json::Value::Number(n)) => n.to_string(),
        Some(_) => return Err(parse_error(path, line_no, "field \"id\" must be a string")),
        None => return Err(parse_error(path, line_no, "missing required field \"id\"")),
    };
    let text = raw
        .text
        .ok_or_else(|| parse_error(path, line_no, "missing required field \"text\""))?;
    let labels = raw
        .labels
        .map(|l| parse_labels(l.iter().map(String::as_str), path, line_no))
        .transpose()?;
    let gold = raw
        .gold
        .map(|g| g.parse::<Label>().map_err(|e| parse_error(path, line_no, e)))
        .transpose()?;
    Ok(Message {
        id,
        timestamp: raw.timestamp.unwrap_or(0),
        text,
        followers: raw.followers.unwrap_or(0),
        friends: raw.friends.unwrap_or(0),
        labels,
        gold,
    })
}

fn load_jsonl(path: &Path) -> Result<Vec<Message>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut messages = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        messages.push(parse_jsonl_record(&line, path, idx as u64 + 1)?);
    }
    Ok(messages)
}

fn load_csv(path: &Path) -> Result<Vec<Message>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| parse_error(path, 1, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| parse_error(path, 1, e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (c_id, c_text) = (col("id"), col("text"));
    let (c_ts, c_fol, c_fri, c_lab, c_gold) = (
        col("timestamp"),
        col("followers"),
        col("friends"),
        col("labels"),
        col("gold"),
    );

    let mut messages = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |c: Option<usize>| c.and_then(|i| record.get(i)).filter(|s| !s.is_empty());
        let int = |c: Option<usize>, name: &str| -> Result<i64> {
            field(c)
                .map(|s| {
                    s.trim()
                        .parse::<i64>()
                        .map_err(|_| parse_error(path, line, format!("field {name:?} is not an integer")))
                })
                .transpose()
                .map(|v| v.unwrap_or(0))
        };
        let id = field(c_id).ok_or_else(|| parse_error(path, line, "missing required field \"id\""))?;
        let text = c_id
            .and(c_text)
            .and_then(|i| record.get(i))
            .ok_or_else(|| parse_error(path, line, "missing required field \"text\""))?;
        let labels = field(c_lab)
            .map(|s| parse_labels(s.split('|'), path, line))
            .transpose()?;
        let gold = field(c_gold)
            .map(|g| g.parse::<Label>().map_err(|e| parse_error(path, line, e)))
            .transpose()?;
        messages.push(Message {
            id: id.to_string(),
            timestamp: int(c_ts, "timestamp")?,
            text: text.to_string(),
            followers: int(c_fol, "followers")?,
            friends: int(c_fri, "friends")?,
            labels,
            gold,
        });
    }
    Ok(messages)
}

/// Reads a corpus file, one message per record, in file order.
pub fn load_corpus(path: impl AsRef<Path>, format: Format) -> Result<Corpus> {
    let path = path.as_ref();
    let messages = match format {
        Format::Jsonl => load_jsonl(path)?,
        Format::Csv => load_csv(path)?,
    };
    if messages.is_empty() {
        return Err(Error::EmptyCorpus(path.to_path_buf()));
    }
    Ok(Corpus::new(messages, path.display().to_string()))
}

pub fn write_jsonl(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for m in &corpus.messages {
        serde_json::to_writer(&mut out, m)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads `event_time,magnitude` rows (header optional).
pub fn load_events(path: impl AsRef<Path>) -> Result<Vec<SeismicEvent>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_error(path, 1, e.to_string()))?;
    let mut events = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_error(path, 0, e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let (Some(t), Some(m)) = (record.get(0), record.get(1)) else {
            return Err(parse_error(path, line, "expected event_time,magnitude"));
        };
        if line == 1 && t == "event_time" {
            continue;
        }
        let event_time = t
            .parse::<i64>()
            .map_err(|_| parse_error(path, line, "event_time is not an integer"))?;
        let magnitude = m
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v >= 0.0)
            .ok_or_else(|| parse_error(path, line, "magnitude must be a finite non-negative number"))?;
        events.push(SeismicEvent {
            event_time,
            magnitude,
        });
    }
    Ok(events)
}

/// Every-k-th selection of `quota` indexes out of `n`, starting at 0.
fn fixed_step(n: usize, quota: usize) -> impl Iterator<Item = usize> {
    let step = n.checked_div(quota).map_or(1, |s| s.max(1));
    (0..quota.min(n)).map(move |i| i * step)
}

/// Splits `target` over strata with the given sizes. Equal shares, remainder
/// to the earliest strata; strata too small for their share are taken whole
/// and the shortfall is re-spread over the rest.
fn stratum_quotas(sizes: &[usize], target: usize) -> Vec<usize> {
    let mut quotas = vec![0usize; sizes.len()];
    let mut open: Vec<usize> = (0..sizes.len()).collect();
    let mut remaining = target;
    loop {
        if open.is_empty() || remaining == 0 {
            return quotas;
        }
        let share = remaining / open.len();
        let extra = remaining % open.len();
        let saturated: Vec<usize> = open
            .iter()
            .enumerate()
            .filter(|&(pos, &s)| sizes[s] <= share + usize::from(pos < extra))
            .map(|(_, &s)| s)
            .collect();
        if saturated.is_empty() {
            for (pos, &s) in open.iter().enumerate() {
                quotas[s] = share + usize::from(pos < extra);
            }
            return quotas;
        }
        for &s in &saturated {
            quotas[s] = sizes[s];
            remaining -= sizes[s];
        }
        open.retain(|s| !saturated.contains(s));
    }
}

/// Deterministic fixed-step sample of `target` messages, optionally balanced
/// across strata (e.g. [`Message::day`]). Output keeps corpus order.
pub fn systematic_sample<F, K>(corpus: &Corpus, target: usize, strata: Option<F>) -> Corpus
where
    F: Fn(&Message) -> K,
    K: Ord,
{
    let n = corpus.len();
    if target >= n {
        return corpus.derived(corpus.messages.clone(), "sample(all)");
    }
    let mut chosen: Vec<usize> = match strata {
        None => fixed_step(n, target).collect(),
        Some(key) => {
            let mut groups: BTreeMap<K, Vec<usize>> = BTreeMap::new();
            for (i, m) in corpus.messages.iter().enumerate() {
                groups.entry(key(m)).or_default().push(i);
            }
            let members: Vec<Vec<usize>> = groups.into_values().collect();
            let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
            let quotas = stratum_quotas(&sizes, target);
            members
                .iter()
                .zip(quotas)
                .flat_map(|(idx, q)| fixed_step(idx.len(), q).map(|j| idx[j]).collect::<Vec<_>>())
                .collect()
        }
    };
    chosen.sort_unstable();
    let messages = chosen.into_iter().map(|i| corpus.messages[i].clone()).collect();
    corpus.derived(messages, &format!("sample({target})"))
}

/// Levenshtein distance over chars, normalized by the longer text's length.
pub fn normalized_levenshtein(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 0.0;
    }
    strsim::levenshtein(a, b) as f64 / longest as f64
}

fn near_duplicate(a: &str, a_len: usize, b: &str, b_len: usize, tolerance: f64) -> bool {
    let longest = a_len.max(b_len);
    if longest == 0 {
        return true;
    }
    // The length gap is a lower bound on the edit distance.
    if (a_len.abs_diff(b_len)) as f64 / longest as f64 > tolerance {
        return false;
    }
    strsim::levenshtein(a, b) as f64 / longest as f64 <= tolerance
}

/// Drops each message whose normalized distance to an already kept message
/// is within `tolerance`. First occurrences win.
pub fn dedup_levenshtein(corpus: &Corpus, tolerance: f64) -> Corpus {
    let mut kept: Vec<(usize, usize)> = Vec::new();
    for (i, m) in corpus.messages.iter().enumerate() {
        let len = m.text.chars().count();
        let dup = kept.par_iter().any(|&(j, klen)| {
            near_duplicate(&m.text, len, &corpus.messages[j].text, klen, tolerance)
        });
        if !dup {
            kept.push((i, len));
        }
    }
    let messages = kept
        .into_iter()
        .map(|(i, _)| corpus.messages[i].clone())
        .collect();
    corpus.derived(messages, &format!("dedup({tolerance})"))
}

pub const DEFAULT_MIN_MAGNITUDE: f64 = 4.0;
pub const DEFAULT_WINDOW_BEFORE: i64 = 20 * 60;
pub const DEFAULT_WINDOW_AFTER: i64 = 2 * 60 * 60;

/// Removes pool messages posted inside `[t - before, t + after]` of any event
/// of at least `min_magnitude`.
pub fn filter_event_windows(
    pool: &Corpus,
    events: &[SeismicEvent],
    min_magnitude: f64,
    before: i64,
    after: i64,
) -> Corpus {
    let mut windows: Vec<(i64, i64)> = events
        .iter()
        .filter(|e| e.magnitude >= min_magnitude)
        .map(|e| (e.event_time - before, e.event_time + after))
        .collect();
    windows.sort_unstable();
    let inside = |t: i64| {
        let upto = windows.partition_point(|w| w.0 <= t);
        windows[..upto].iter().any(|w| t <= w.1)
    };
    let messages = pool
        .messages
        .iter()
        .filter(|m| !inside(m.timestamp))
        .cloned()
        .collect();
    pool.derived(messages, "event-window filter")
}
