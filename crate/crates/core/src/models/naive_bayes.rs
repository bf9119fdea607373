use serde::{Deserialize, Serialize};

/// Bernoulli naive Bayes over features binarized at `x > threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliNb {
    pub threshold: f64,
    /// log P(x_j = 1 | relevant) - log P(x_j = 1 | non-relevant)
    pub on_ratio: Vec<f64>,
    /// Same for x_j = 0.
    pub off_ratio: Vec<f64>,
    pub prior_ratio: f64,
}

impl BernoulliNb {
    pub fn fit(x: &[Vec<f64>], y: &[bool], alpha: f64, threshold: f64) -> Self {
        let d = x[0].len();
        let mut on = [vec![0.0; d], vec![0.0; d]];
        let mut n = [0.0f64; 2];
        for (row, &rel) in x.iter().zip(y) {
            let c = rel as usize;
            n[c] += 1.0;
            for (j, &v) in row.iter().enumerate() {
                if v > threshold {
                    on[c][j] += 1.0;
                }
            }
        }
        let p = |c: usize, j: usize| (on[c][j] + alpha) / (n[c] + 2.0 * alpha);
        let on_ratio = (0..d).map(|j| p(1, j).ln() - p(0, j).ln()).collect();
        let off_ratio = (0..d)
            .map(|j| (1.0 - p(1, j)).ln() - (1.0 - p(0, j)).ln())
            .collect();
        BernoulliNb {
            threshold,
            on_ratio,
            off_ratio,
            prior_ratio: n[1].ln() - n[0].ln(),
        }
    }

    /// Posterior log-odds of relevance.
    pub fn score(&self, x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(j, &v)| {
                if v > self.threshold {
                    self.on_ratio[j]
                } else {
                    self.off_ratio[j]
                }
            })
            .sum::<f64>()
            + self.prior_ratio
    }
}
