//! Gold labels by majority vote and inter-rater agreement statistics.

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label};
use crate::error::{Error, Result};

pub const RATERS: usize = 3;

/// Label held by at least two of exactly three raters.
pub fn majority_vote(labels: &[Label]) -> Result<Label> {
    if labels.len() != RATERS {
        return Err(Error::Validation(format!(
            "majority vote needs exactly {RATERS} labels, got {}",
            labels.len()
        )));
    }
    let relevant = labels.iter().filter(|l| l.is_relevant()).count();
    Ok(Label::from_relevant(2 * relevant > RATERS))
}

/// Per-item category counts with a fixed number of raters per item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingMatrix {
    pub k: usize,
    pub categories: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl RatingMatrix {
    pub fn new(categories: Vec<String>, counts: Vec<Vec<usize>>) -> Result<Self> {
        let k = counts.first().map_or(0, |r| r.iter().sum());
        for (i, row) in counts.iter().enumerate() {
            if row.len() != categories.len() {
                return Err(Error::Validation(format!(
                    "item {i} has {} category counts, expected {}",
                    row.len(),
                    categories.len()
                )));
            }
            if row.iter().sum::<usize>() != k {
                return Err(Error::Validation(format!(
                    "item {i} has {} ratings, expected {k}",
                    row.iter().sum::<usize>()
                )));
            }
        }
        Ok(RatingMatrix {
            k,
            categories,
            counts,
        })
    }

    /// Binary matrix from per-item rater labels.
    pub fn from_labels(items: &[Vec<Label>]) -> Result<Self> {
        let counts = items
            .iter()
            .map(|ls| {
                let rel = ls.iter().filter(|l| l.is_relevant()).count();
                vec![rel, ls.len() - rel]
            })
            .collect();
        RatingMatrix::new(
            vec![Label::Relevant.to_string(), Label::NonRelevant.to_string()],
            counts,
        )
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    fn pairs(x: usize) -> f64 {
        (x * x.saturating_sub(1)) as f64 / 2.0
    }

    fn item_agreement(&self, row: &[usize]) -> f64 {
        row.iter().map(|&c| Self::pairs(c)).sum::<f64>() / Self::pairs(self.k)
    }
}

/// Mean fraction of agreeing rater pairs per item.
pub fn raw_agreement(m: &RatingMatrix) -> Result<f64> {
    if m.k < 2 || m.n() == 0 {
        return Err(Error::Validation(
            "agreement needs at least one item and two raters".into(),
        ));
    }
    Ok(m.counts.iter().map(|r| m.item_agreement(r)).sum::<f64>() / m.n() as f64)
}

pub fn fleiss_kappa(m: &RatingMatrix) -> Result<f64> {
    let p_bar = raw_agreement(m)?;
    let total = (m.n() * m.k) as f64;
    let p_e: f64 = (0..m.categories.len())
        .map(|c| {
            let p = m.counts.iter().map(|r| r[c]).sum::<usize>() as f64 / total;
            p * p
        })
        .sum();
    if p_e >= 1.0 - 1e-12 {
        return Err(Error::UndefinedKappa);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Two-way ANOVA decomposition behind ICC(2,1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IccAnova {
    pub n: usize,
    pub k: usize,
    pub ss_rows: f64,
    pub ss_cols: f64,
    pub ss_error: f64,
    pub df_rows: usize,
    pub df_cols: usize,
    pub df_error: usize,
    pub ms_rows: f64,
    pub ms_cols: f64,
    pub ms_error: f64,
    /// `ms_rows / ms_error`; absent when the residual is zero.
    pub f_rows: Option<f64>,
    pub icc: f64,
}

/// Two-way random effects, absolute agreement, single rater.
pub fn icc_anova(ratings: &[Vec<f64>]) -> Result<IccAnova> {
    let n = ratings.len();
    let k = ratings.first().map_or(0, Vec::len);
    if n < 2 || k < 2 {
        return Err(Error::Validation("ICC needs at least two items and two raters".into()));
    }
    if ratings.iter().any(|r| r.len() != k) {
        return Err(Error::Validation("every item needs the same number of ratings".into()));
    }
    let (nf, kf) = (n as f64, k as f64);
    let grand = ratings.iter().flatten().sum::<f64>() / (nf * kf);
    let ss_total: f64 = ratings.iter().flatten().map(|x| (x - grand).powi(2)).sum();
    if ss_total <= 1e-12 {
        return Err(Error::UndefinedIcc);
    }
    let ss_rows = kf
        * ratings
            .iter()
            .map(|r| (r.iter().sum::<f64>() / kf - grand).powi(2))
            .sum::<f64>();
    let ss_cols = nf
        * (0..k)
            .map(|j| (ratings.iter().map(|r| r[j]).sum::<f64>() / nf - grand).powi(2))
            .sum::<f64>();
    let ss_error = (ss_total - ss_rows - ss_cols).max(0.0);
    let (df_rows, df_cols, df_error) = (n - 1, k - 1, (n - 1) * (k - 1));
    let ms_rows = ss_rows / df_rows as f64;
    let ms_cols = ss_cols / df_cols as f64;
    let ms_error = ss_error / df_error as f64;
    let denom = ms_rows + (kf - 1.0) * ms_error + kf / nf * (ms_cols - ms_error);
    if denom.abs() <= 1e-15 {
        return Err(Error::UndefinedIcc);
    }
    Ok(IccAnova {
        n,
        k,
        ss_rows,
        ss_cols,
        ss_error,
        df_rows,
        df_cols,
        df_error,
        ms_rows,
        ms_cols,
        ms_error,
        f_rows: (ms_error > 0.0).then(|| ms_rows / ms_error),
        icc: (ms_rows - ms_error) / denom,
    })
}

pub fn icc_2_1(ratings: &[Vec<f64>]) -> Result<f64> {
    icc_anova(ratings).map(|a| a.icc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n: usize,
    pub k: usize,
    pub raw_agreement: Option<f64>,
    pub fleiss_kappa: Option<f64>,
    pub icc_2_1: Option<f64>,
    pub anova: Option<IccAnova>,
    /// Why a statistic is missing, one entry per missing statistic.
    pub notes: Vec<String>,
    /// Ids of messages without exactly three labels.
    pub rejects: Vec<String>,
}

/// Assigns gold labels by majority vote, rejects messages without three
/// rater labels and computes agreement over the accepted ones.
pub fn validate_labels(corpus: &Corpus) -> (Corpus, ValidationReport) {
    let mut accepted = Vec::new();
    let mut rejects = Vec::new();
    for m in &corpus.messages {
        match m.labels.as_deref().map(majority_vote) {
            Some(Ok(gold)) => accepted.push(m.clone().with_gold(gold)),
            _ => rejects.push(m.id.clone()),
        }
    }
    let items: Vec<Vec<Label>> = accepted
        .iter()
        .map(|m| m.labels.clone().unwrap_or_default())
        .collect();
    let mut notes = Vec::new();
    let mut keep = |name: &str, r: Result<f64>| match r {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{name}: {e}"));
            None
        }
    };
    let matrix = RatingMatrix::from_labels(&items);
    let raw = keep("raw_agreement", matrix.as_ref().map_err(clone_err).and_then(raw_agreement));
    let kappa = keep("fleiss_kappa", matrix.as_ref().map_err(clone_err).and_then(fleiss_kappa));
    let numeric: Vec<Vec<f64>> = items
        .iter()
        .map(|ls| ls.iter().map(|l| l.as_f64()).collect())
        .collect();
    let anova = icc_anova(&numeric);
    let icc = keep("icc_2_1", anova.as_ref().map(|a| a.icc).map_err(clone_err));
    let report = ValidationReport {
        n: accepted.len(),
        k: RATERS,
        raw_agreement: raw,
        fleiss_kappa: kappa,
        icc_2_1: icc,
        anova: anova.ok(),
        notes,
        rejects,
    };
    let out = Corpus::new(accepted, format!("{} | majority vote", corpus.provenance));
    (out, report)
}

fn clone_err(e: &Error) -> Error {
    match e {
        Error::UndefinedKappa => Error::UndefinedKappa,
        Error::UndefinedIcc => Error::UndefinedIcc,
        other => Error::Validation(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Message;
    use proptest::prelude::*;
    use Label::{NonRelevant as N, Relevant as R};

    fn binary(counts: Vec<Vec<usize>>) -> RatingMatrix {
        RatingMatrix::new(vec!["r".into(), "n".into()], counts).unwrap()
    }

    #[test]
    fn majority() {
        assert_eq!(majority_vote(&[R, R, N]).unwrap(), R);
        assert_eq!(majority_vote(&[N, N, N]).unwrap(), N);
        assert!(majority_vote(&[R, N]).is_err());
    }

    #[test]
    fn agreement_extremes() {
        let perfect = binary(vec![vec![3, 0], vec![0, 3], vec![3, 0]]);
        assert_eq!(raw_agreement(&perfect).unwrap(), 1.0);
        assert_eq!(fleiss_kappa(&perfect).unwrap(), 1.0);
        let split = binary(vec![vec![2, 1], vec![1, 2]]);
        assert!((raw_agreement(&split).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let one = binary(vec![vec![3, 0], vec![3, 0]]);
        assert!(matches!(fleiss_kappa(&one), Err(Error::UndefinedKappa)));
        assert!(RatingMatrix::new(vec!["a".into()], vec![vec![3], vec![2]]).is_err());
    }

    #[test]
    fn icc_extremes() {
        let same = vec![vec![1.0; 3], vec![0.0; 3], vec![1.0; 3]];
        assert!((icc_2_1(&same).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(icc_2_1(&[vec![1.0; 3], vec![1.0; 3]]), Err(Error::UndefinedIcc)));
        assert!(icc_2_1(&[vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn validation_report_lists_rejects() {
        let mut msgs = vec![
            Message::new("a", 0, "x"),
            Message::new("b", 0, "y"),
            Message::new("c", 0, "z"),
        ];
        msgs[0].labels = Some(vec![R, R, R]);
        msgs[1].labels = Some(vec![N, N, N]);
        msgs[2].labels = Some(vec![R, N]);
        let (out, report) = validate_labels(&Corpus::new(msgs, "t"));
        assert_eq!(report.rejects, ["c"]);
        assert_eq!(report.fleiss_kappa, Some(1.0));
        assert_eq!(report.n, 2);
        assert_eq!(out.messages[0].gold, Some(R));
        assert_eq!(out.messages[1].gold, Some(N));
    }

    proptest! {
        #[test]
        fn raw_agreement_permutation_invariant(rows in proptest::collection::vec(0usize..=3, 1..20), rot in 0usize..20) {
            let counts: Vec<Vec<usize>> = rows.iter().map(|&r| vec![r, 3 - r]).collect();
            let a = raw_agreement(&binary(counts.clone())).unwrap();
            let mut rotated = counts.clone();
            let len = rotated.len();
            rotated.rotate_left(rot % len);
            let swapped: Vec<Vec<usize>> = counts.iter().map(|r| vec![r[1], r[0]]).collect();
            prop_assert!((a - raw_agreement(&binary(rotated)).unwrap()).abs() < 1e-12);
            prop_assert!((a - raw_agreement(&binary(swapped.clone())).unwrap()).abs() < 1e-12);
            if let Ok(kappa) = fleiss_kappa(&binary(swapped)) {
                prop_assert!(kappa <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn icc_shift_invariant(
            ratings in proptest::collection::vec(proptest::collection::vec(0u8..2, 3), 2..15),
            shift in -5.0f64..5.0,
        ) {
            let r: Vec<Vec<f64>> = ratings.iter().map(|row| row.iter().map(|&v| v as f64).collect()).collect();
            let shifted: Vec<Vec<f64>> = r.iter().map(|row| row.iter().map(|v| v + shift).collect()).collect();
            match (icc_2_1(&r), icc_2_1(&shifted)) {
                (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-9),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
            }
        }
    }
}
