use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Standardizer;
use crate::seed;

/// Linear SVM trained by stochastic subgradient descent on
/// `(lambda/2) |w|^2 + (1/n) sum_i hinge(y_i (w.x_i + b))`, step `1/(lambda t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub standardizer: Standardizer,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearSvm {
    pub fn fit(x: &[Vec<f64>], y: &[bool], lambda: f64, epochs: usize, project: bool, seed: u64) -> Self {
        let standardizer = Standardizer::fit(x);
        let xs: Vec<Vec<f64>> = x.iter().map(|r| standardizer.apply(r)).collect();
        let d = xs[0].len();
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut order: Vec<usize> = (0..xs.len()).collect();
        let mut rng = seed::rng(seed);
        let radius = 1.0 / lambda.sqrt();
        let mut t = 0usize;
        for _ in 0..epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                t += 1;
                let eta = 1.0 / (lambda * t as f64);
                let yi = if y[i] { 1.0 } else { -1.0 };
                let margin = yi * (b + xs[i].iter().zip(&w).map(|(a, c)| a * c).sum::<f64>());
                let shrink = 1.0 - eta * lambda;
                w.iter_mut().for_each(|v| *v *= shrink);
                if margin < 1.0 {
                    for (v, xv) in w.iter_mut().zip(&xs[i]) {
                        *v += eta * yi * xv;
                    }
                    b += eta * yi;
                }
                if project {
                    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > radius {
                        w.iter_mut().for_each(|v| *v *= radius / norm);
                    }
                }
            }
        }
        LinearSvm {
            standardizer,
            weights: w,
            bias: b,
        }
    }

    /// Raw margin `w.x + b`.
    pub fn score(&self, x: &[f64]) -> f64 {
        let z = self.standardizer.apply(x);
        self.bias + z.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_bounds_the_weights() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i % 7) as f64]).collect();
        let y: Vec<bool> = (0..40).map(|i| i >= 20).collect();
        let m = LinearSvm::fit(&x, &y, 4.0, 10, true, 1);
        let norm = m.weights.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm <= 0.5 + 1e-12);
        assert!(m.score(&[39.0, 4.0]) > m.score(&[0.0, 0.0]));
    }
}
