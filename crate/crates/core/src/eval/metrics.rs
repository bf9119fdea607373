use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Relevant is the positive class. Ratios with a zero denominator are
/// reported as 0 and named in `degenerate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub auc: Option<f64>,
    pub confusion: Confusion,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate: Vec<String>,
}

fn ratio(num: usize, den: usize, name: &str, flags: &mut Vec<String>) -> f64 {
    if den == 0 {
        flags.push(name.to_string());
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl MetricSet {
    pub fn from_confusion(c: Confusion) -> MetricSet {
        let mut degenerate = Vec::new();
        let precision = ratio(c.tp, c.tp + c.fp, "precision", &mut degenerate);
        let recall = ratio(c.tp, c.tp + c.fn_, "recall", &mut degenerate);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            degenerate.push("f1".into());
            0.0
        };
        MetricSet {
            precision,
            recall,
            f1,
            accuracy: (c.tp + c.tn) as f64 / c.total().max(1) as f64,
            auc: None,
            confusion: c,
            degenerate,
        }
    }

    /// Mean of each metric over folds; confusion counts are summed.
    pub fn mean(sets: &[MetricSet]) -> MetricSet {
        let n = sets.len() as f64;
        let avg = |f: fn(&MetricSet) -> f64| sets.iter().map(f).sum::<f64>() / n;
        let mut confusion = Confusion::default();
        let mut degenerate: Vec<String> = Vec::new();
        for s in sets {
            confusion.tp += s.confusion.tp;
            confusion.fp += s.confusion.fp;
            confusion.fn_ += s.confusion.fn_;
            confusion.tn += s.confusion.tn;
            for d in &s.degenerate {
                if !degenerate.contains(d) {
                    degenerate.push(d.clone());
                }
            }
        }
        let auc = sets
            .iter()
            .map(|s| s.auc)
            .collect::<Option<Vec<f64>>>()
            .map(|v| v.iter().sum::<f64>() / n);
        MetricSet {
            precision: avg(|s| s.precision),
            recall: avg(|s| s.recall),
            f1: avg(|s| s.f1),
            accuracy: avg(|s| s.accuracy),
            auc,
            confusion,
            degenerate,
        }
    }
}

pub fn confusion(predictions: &[Label], truth: &[Label]) -> Result<Confusion> {
    if predictions.len() != truth.len() {
        return Err(Error::Validation(format!(
            "{} predictions but {} true labels",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Validation("no predictions to evaluate".into()));
    }
    let mut c = Confusion::default();
    for (p, t) in predictions.iter().zip(truth) {
        match (p.is_relevant(), t.is_relevant()) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

pub fn confusion_metrics(predictions: &[Label], truth: &[Label]) -> Result<MetricSet> {
    confusion(predictions, truth).map(MetricSet::from_confusion)
}

/// Area under the ROC curve by the trapezoid rule over score-tie groups.
pub fn auc(scores: &[f64], truth: &[Label]) -> Result<f64> {
    if scores.len() != truth.len() {
        return Err(Error::Validation(format!(
            "{} scores but {} true labels",
            scores.len(),
            truth.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Validation("scores must be finite".into()));
    }
    let pos = truth.iter().filter(|l| l.is_relevant()).count();
    let neg = truth.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Validation(
            "AUC needs at least one relevant and one non-relevant item".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut area = 0.0;
    let mut i = 0;
    while i < order.len() {
        let (tp0, fp0) = (tp, fp);
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if truth[order[i]].is_relevant() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        area += (fp - fp0) as f64 * (tp + tp0) as f64 / 2.0;
    }
    Ok(area / (pos as f64 * neg as f64))
}

/// Confusion metrics at the given labels plus AUC from the scores.
pub fn score_metrics(scored: &[(f64, Label)], truth: &[Label]) -> Result<MetricSet> {
    let labels: Vec<Label> = scored.iter().map(|s| s.1).collect();
    let scores: Vec<f64> = scored.iter().map(|s| s.0).collect();
    let mut m = confusion_metrics(&labels, truth)?;
    m.auc = Some(auc(&scores, truth)?);
    Ok(m)
}
