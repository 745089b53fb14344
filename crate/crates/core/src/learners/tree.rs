//! CART: Gini impurity for classification, variance for regression.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_classes, check_dim, check_training_shape, encode_classes};
use crate::error::Result;
use crate::numerics::DenseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct TreeConfig {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` examines all of them in order.
    pub max_features: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig { max_depth: None, min_samples_leaf: 1, max_features: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Class index (classification) or mean target (regression).
    Leaf { value: f64 },
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    n_features: usize,
    /// Sorted class labels; empty for regression trees.
    classes: Vec<usize>,
    /// Unnormalized impurity decrease per feature, weighted by node fraction.
    importance: Vec<f64>,
}

#[derive(Clone, Copy)]
pub(crate) enum Target<'a> {
    Class { y: &'a [usize], k: usize },
    Real(&'a [f64]),
}

impl DecisionTree {
    pub fn fit_classifier(x: &DenseMatrix, y: &[usize], cfg: &TreeConfig) -> Result<DecisionTree> {
        check_training_shape(x.n_rows(), y.len())?;
        let (classes, idx) = encode_classes(y);
        check_classes(&classes)?;
        let samples: Vec<usize> = (0..y.len()).collect();
        let target = Target::Class { y: &idx, k: classes.len() };
        let mut t = grow(x, target, samples, cfg, None);
        t.classes = classes;
        Ok(t)
    }

    pub fn fit_regressor(x: &DenseMatrix, y: &[f64], cfg: &TreeConfig) -> Result<DecisionTree> {
        check_training_shape(x.n_rows(), y.len())?;
        Ok(grow(x, Target::Real(y), (0..y.len()).collect(), cfg, None))
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub(crate) fn importance(&self) -> &[f64] {
        &self.importance
    }

    pub(crate) fn set_classes(&mut self, classes: Vec<usize>) {
        self.classes = classes;
    }

    /// Leaf value reached by one row.
    pub(crate) fn leaf_value(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict_class(&self, x: &DenseMatrix) -> Result<Vec<usize>> {
        check_dim(self.n_features, x.n_cols())?;
        Ok((0..x.n_rows()).map(|r| self.classes[self.leaf_value(x.row(r)) as usize]).collect())
    }

    pub fn predict_value(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        check_dim(self.n_features, x.n_cols())?;
        Ok((0..x.n_rows()).map(|r| self.leaf_value(x.row(r))).collect())
    }
}

/// Grows a tree on `samples` (which may repeat indices). With `rng`, each
/// node shuffles the feature order and stops after `max_features`
/// non-constant features; otherwise all features are scanned in order.
pub(crate) fn grow(
    x: &DenseMatrix,
    target: Target<'_>,
    samples: Vec<usize>,
    cfg: &TreeConfig,
    mut rng: Option<&mut ChaCha8Rng>,
) -> DecisionTree {
    let d = x.n_cols();
    let total = samples.len() as f64;
    let min_leaf = cfg.min_samples_leaf.max(1);
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut importance = vec![0.0; d];
    let mut stack = vec![(0usize, samples, 0usize)];
    let mut order: Vec<usize> = (0..d).collect();
    while let Some((slot, samples, depth)) = stack.pop() {
        let stats = NodeStats::of(target, &samples);
        let can_split = !stats.pure && samples.len() >= 2 * min_leaf && cfg.max_depth.is_none_or(|m| depth < m);
        let split = if can_split {
            if let Some(r) = rng.as_deref_mut() {
                order.shuffle(r);
            }
            best_split(x, target, &samples, &stats, &order, cfg.max_features, min_leaf)
        } else {
            None
        };
        match split {
            None => nodes[slot] = Node::Leaf { value: stats.leaf_value(target, &samples) },
            Some(s) => {
                importance[s.feature] += s.gain.max(0.0) / total;
                let (l, r): (Vec<usize>, Vec<usize>) =
                    samples.iter().partition(|&&i| x.get(i, s.feature) <= s.threshold);
                let left = nodes.len();
                nodes.push(Node::Leaf { value: 0.0 });
                nodes.push(Node::Leaf { value: 0.0 });
                nodes[slot] = Node::Split { feature: s.feature, threshold: s.threshold, left, right: left + 1 };
                stack.push((left + 1, r, depth + 1));
                stack.push((left, l, depth + 1));
            }
        }
    }
    DecisionTree { nodes, n_features: d, classes: Vec::new(), importance }
}

struct NodeStats {
    pure: bool,
    /// n × impurity of the node.
    cost: f64,
    counts: Vec<u64>,
}

impl NodeStats {
    fn of(target: Target<'_>, samples: &[usize]) -> NodeStats {
        match target {
            Target::Class { y, k } => {
                let mut counts = vec![0u64; k];
                for &i in samples {
                    counts[y[i]] += 1;
                }
                let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
                NodeStats { pure, cost: gini_cost(&counts, samples.len() as u64), counts }
            }
            Target::Real(y) => {
                let first = samples.first().map(|&i| y[i]);
                let pure = samples.iter().all(|&i| Some(y[i]) == first);
                let n = samples.len() as f64;
                let mean = samples.iter().map(|&i| y[i]).sum::<f64>() / n;
                let cost = samples.iter().map(|&i| (y[i] - mean).powi(2)).sum();
                NodeStats { pure, cost, counts: Vec::new() }
            }
        }
    }

    fn leaf_value(&self, target: Target<'_>, samples: &[usize]) -> f64 {
        match target {
            Target::Class { .. } => {
                let mut best = 0;
                for (c, &n) in self.counts.iter().enumerate() {
                    if n > self.counts[best] {
                        best = c;
                    }
                }
                best as f64
            }
            Target::Real(y) => {
                if self.pure {
                    y[samples[0]]
                } else {
                    samples.iter().map(|&i| y[i]).sum::<f64>() / samples.len() as f64
                }
            }
        }
    }
}

/// `n · gini = n − Σ c² / n`.
fn gini_cost(counts: &[u64], n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let sq: u64 = counts.iter().map(|c| c * c).sum();
    n as f64 - sq as f64 / n as f64
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn best_split(
    x: &DenseMatrix,
    target: Target<'_>,
    samples: &[usize],
    stats: &NodeStats,
    order: &[usize],
    max_features: Option<usize>,
    min_leaf: usize,
) -> Option<Split> {
    let n = samples.len();
    let budget = max_features.unwrap_or(order.len()).max(1);
    let mut visited = 0;
    let mut best: Option<Split> = None;
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(n);
    for &f in order {
        if visited == budget {
            break;
        }
        sorted.clear();
        sorted.extend(samples.iter().map(|&i| (x.get(i, f), i)));
        let (lo, hi) = sorted.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(v, _)| (a.min(v), b.max(v)));
        if lo == hi {
            continue;
        }
        visited += 1;
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let candidate = match target {
            Target::Class { y, .. } => scan_class(&sorted, y, stats, min_leaf),
            Target::Real(y) => scan_real(&sorted, y, stats.cost, min_leaf),
        };
        if let Some((threshold, gain)) = candidate {
            let better = match &best {
                None => true,
                Some(b) => gain > b.gain || (gain == b.gain && f < b.feature),
            };
            if better {
                best = Some(Split { feature: f, threshold, gain });
            }
        }
    }
    best
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

fn scan_class(sorted: &[(f64, usize)], y: &[usize], stats: &NodeStats, min_leaf: usize) -> Option<(f64, f64)> {
    let n = sorted.len();
    let mut left = vec![0u64; stats.counts.len()];
    let mut right = stats.counts.clone();
    let (mut sq_l, mut sq_r): (u64, u64) = (0, right.iter().map(|c| c * c).sum());
    let mut best: Option<(f64, f64)> = None;
    for p in 0..n - 1 {
        let c = y[sorted[p].1];
        sq_l += 2 * left[c] + 1;
        left[c] += 1;
        sq_r -= 2 * right[c] - 1;
        right[c] -= 1;
        let nl = p + 1;
        let nr = n - nl;
        if sorted[p].0 == sorted[p + 1].0 || nl < min_leaf || nr < min_leaf {
            continue;
        }
        let cost = (nl as f64 - sq_l as f64 / nl as f64) + (nr as f64 - sq_r as f64 / nr as f64);
        let gain = stats.cost - cost;
        if best.is_none_or(|(_, g)| gain > g) {
            best = Some((midpoint(sorted[p].0, sorted[p + 1].0), gain));
        }
    }
    best
}

fn scan_real(sorted: &[(f64, usize)], y: &[f64], parent_cost: f64, min_leaf: usize) -> Option<(f64, f64)> {
    let n = sorted.len();
    let total: f64 = sorted.iter().map(|&(_, i)| y[i]).sum();
    let total_sq: f64 = sorted.iter().map(|&(_, i)| y[i] * y[i]).sum();
    let (mut s_l, mut sq_l) = (0.0, 0.0);
    let mut best: Option<(f64, f64)> = None;
    for p in 0..n - 1 {
        let v = y[sorted[p].1];
        s_l += v;
        sq_l += v * v;
        let nl = p + 1;
        let nr = n - nl;
        if sorted[p].0 == sorted[p + 1].0 || nl < min_leaf || nr < min_leaf {
            continue;
        }
        let s_r = total - s_l;
        let sq_r = total_sq - sq_l;
        let cost = (sq_l - s_l * s_l / nl as f64).max(0.0) + (sq_r - s_r * s_r / nr as f64).max(0.0);
        let gain = parent_cost - cost;
        if best.is_none_or(|(_, g)| gain > g) {
            best = Some((midpoint(sorted[p].0, sorted[p + 1].0), gain));
        }
    }
    best
}
