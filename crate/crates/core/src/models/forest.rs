use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seed::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub trees: usize,
    pub min_samples_split: usize,
    /// 0 means floor(sqrt(d)).
    pub max_features: usize,
    /// 0 means unlimited.
    pub max_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf {
        relevant: bool,
        fraction: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// CART tree with Gini splits. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

fn gini_weighted(n: f64, pos: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let p = pos / n;
    n * 2.0 * p * (1.0 - p)
}

struct Grower<'a> {
    x: &'a [Vec<f64>],
    y: &'a [bool],
    params: Params,
    mtry: usize,
    rng: Rng,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    /// Best (impurity, threshold) split on one feature, if it is not constant.
    fn best_on(&self, idx: &[usize], feature: usize) -> Option<(f64, f64)> {
        let mut vals: Vec<(f64, bool)> = idx.iter().map(|&i| (self.x[i][feature], self.y[i])).collect();
        vals.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let n = vals.len() as f64;
        let total_pos = vals.iter().filter(|v| v.1).count() as f64;
        let mut pos_left = 0.0;
        let mut best: Option<(f64, f64)> = None;
        for i in 0..vals.len() - 1 {
            if vals[i].1 {
                pos_left += 1.0;
            }
            if vals[i].0 < vals[i + 1].0 {
                let n_left = (i + 1) as f64;
                let imp = gini_weighted(n_left, pos_left) + gini_weighted(n - n_left, total_pos - pos_left);
                if best.is_none_or(|(b, _)| imp < b) {
                    let mid = 0.5 * (vals[i].0 + vals[i + 1].0);
                    let thr = if mid < vals[i + 1].0 { mid } else { vals[i].0 };
                    best = Some((imp, thr));
                }
            }
        }
        best
    }

    fn leaf(&mut self, idx: &[usize]) -> usize {
        let pos = idx.iter().filter(|&&i| self.y[i]).count();
        let fraction = pos as f64 / idx.len() as f64;
        self.nodes.push(Node::Leaf {
            relevant: fraction > 0.5,
            fraction,
        });
        self.nodes.len() - 1
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let pos = idx.iter().filter(|&&i| self.y[i]).count();
        let depth_capped = self.params.max_depth > 0 && depth >= self.params.max_depth;
        if pos == 0 || pos == idx.len() || idx.len() < self.params.min_samples_split || depth_capped {
            return self.leaf(idx);
        }

        let d = self.x[0].len();
        let mut features: Vec<usize> = (0..d).collect();
        let mut best: Option<(f64, usize, f64)> = None;
        // Partial Fisher-Yates: draw candidates until `mtry` were examined
        // and at least one of them splits.
        for j in 0..d {
            if j >= self.mtry && best.is_some() {
                break;
            }
            let pick = self.rng.gen_range(j..d);
            features.swap(j, pick);
            let f = features[j];
            if let Some((imp, thr)) = self.best_on(idx, f) {
                if best.is_none_or(|(b, _, _)| imp < b) {
                    best = Some((imp, f, thr));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return self.leaf(idx);
        };

        let mut split = 0;
        for k in 0..idx.len() {
            if self.x[idx[k]][feature] <= threshold {
                idx.swap(split, k);
                split += 1;
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            relevant: false,
            fraction: 0.0,
        });
        let (l, r) = idx.split_at_mut(split);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

impl Tree {
    pub fn vote(&self, x: &[f64]) -> bool {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { relevant, .. } => return relevant,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<Tree>,
}

impl RandomForest {
    pub fn fit(x: &[Vec<f64>], y: &[bool], params: Params, seed: u64) -> Self {
        let n = x.len();
        let d = x[0].len();
        let mtry = if params.max_features == 0 {
            ((d as f64).sqrt().floor() as usize).max(1)
        } else {
            params.max_features.min(d)
        };
        let trees = (0..params.trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = seed::stage_rng(seed, "tree", &[t as u64]);
                let mut idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                let mut g = Grower {
                    x,
                    y,
                    params,
                    mtry,
                    rng,
                    nodes: Vec::new(),
                };
                g.grow(&mut idx, 0);
                Tree { nodes: g.nodes }
            })
            .collect();
        RandomForest { trees }
    }

    /// Fraction of trees voting relevant.
    pub fn score(&self, x: &[f64]) -> f64 {
        let votes = self.trees.iter().filter(|t| t.vote(x)).count();
        votes as f64 / self.trees.len() as f64
    }
}
