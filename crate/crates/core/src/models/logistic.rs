use serde::{Deserialize, Serialize};

use super::Standardizer;

/// L2-regularized logistic regression on standardized features.
///
/// Minimizes `(1/n) * [sum_i nll_i + (lambda/2) * |w|^2]` with an
/// unpenalized bias, using accelerated gradient steps with backtracking and
/// function-value restarts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub standardizer: Standardizer,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub grad_inf_norm: f64,
    pub converged: bool,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

struct Problem<'a> {
    x: &'a [Vec<f64>],
    y: &'a [bool],
    lambda: f64,
}

impl Problem<'_> {
    /// Objective and gradient at `theta = [w..., b]`.
    fn eval(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let d = theta.len() - 1;
        let n = self.x.len() as f64;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut f = 0.0;
        for (row, &y) in self.x.iter().zip(self.y) {
            let z = theta[d] + row.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>();
            f += softplus(z) - if y { z } else { 0.0 };
            let r = sigmoid(z) - f64::from(y as u8);
            for (g, v) in grad.iter_mut().zip(row) {
                *g += r * v;
            }
            grad[d] += r;
        }
        let mut reg = 0.0;
        for j in 0..d {
            reg += theta[j] * theta[j];
            grad[j] += self.lambda * theta[j];
        }
        f += 0.5 * self.lambda * reg;
        grad.iter_mut().for_each(|g| *g /= n);
        f / n
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl LogisticRegression {
    pub fn fit(x: &[Vec<f64>], y: &[bool], lambda: f64, max_iter: usize, tol: f64) -> Self {
        let standardizer = Standardizer::fit(x);
        let xs: Vec<Vec<f64>> = x.iter().map(|r| standardizer.apply(r)).collect();
        let problem = Problem { x: &xs, y, lambda };
        let p = xs[0].len() + 1;

        let mut theta = vec![0.0; p];
        let mut grad = vec![0.0; p];
        let mut f = problem.eval(&theta, &mut grad);
        let mut prev = theta.clone();
        let mut momentum = 1.0f64;
        let mut lipschitz = 1.0f64;
        let (mut y_pt, mut g_y, mut cand, mut g_cand) =
            (vec![0.0; p], vec![0.0; p], vec![0.0; p], vec![0.0; p]);
        let mut iterations = 0;
        let mut converged = inf_norm(&grad) < tol;

        while !converged && iterations < max_iter {
            iterations += 1;
            let next_momentum = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
            let beta = (momentum - 1.0) / next_momentum;
            let f_y = if beta == 0.0 {
                y_pt.copy_from_slice(&theta);
                g_y.copy_from_slice(&grad);
                f
            } else {
                for j in 0..p {
                    y_pt[j] = theta[j] + beta * (theta[j] - prev[j]);
                }
                problem.eval(&y_pt, &mut g_y)
            };
            let g_sq: f64 = g_y.iter().map(|g| g * g).sum();
            let mut f_cand;
            let mut tries = 0;
            loop {
                for j in 0..p {
                    cand[j] = y_pt[j] - g_y[j] / lipschitz;
                }
                f_cand = problem.eval(&cand, &mut g_cand);
                let slack = 1e-15 * (1.0 + f_y.abs());
                if f_cand <= f_y - 0.5 * g_sq / lipschitz + slack || tries > 60 {
                    break;
                }
                lipschitz *= 2.0;
                tries += 1;
            }
            if f_cand > f && beta != 0.0 {
                // momentum overshot: drop it and retry from the current point
                momentum = 1.0;
                prev.copy_from_slice(&theta);
                continue;
            }
            prev.copy_from_slice(&theta);
            theta.copy_from_slice(&cand);
            grad.copy_from_slice(&g_cand);
            f = f_cand;
            momentum = next_momentum;
            lipschitz *= 0.9;
            converged = inf_norm(&grad) < tol;
        }

        let bias = theta.pop().unwrap_or(0.0);
        LogisticRegression {
            standardizer,
            weights: theta,
            bias,
            iterations,
            grad_inf_norm: inf_norm(&grad),
            converged,
        }
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        let z = self.standardizer.apply(x);
        self.bias + z.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Probability of relevance.
    pub fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }
}
