use rand::Rng;
use rayon::prelude::*;

use super::tree::{grow, DecisionTree, Target, TreeConfig};
use super::{accuracy, check_classes, check_dim, check_training_shape, encode_classes};
use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;
use crate::seed::{child_seed, rng_for};

/// How many features each split examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureRule {
    /// √d for classification, d/3 for regression.
    Auto,
    All,
    Sqrt,
    Third,
    Count(usize),
}

impl FeatureRule {
    fn resolve(self, d: usize, classify: bool) -> usize {
        let m = match self {
            FeatureRule::Auto if classify => (d as f64).sqrt() as usize,
            FeatureRule::Auto => d / 3,
            FeatureRule::All => d,
            FeatureRule::Sqrt => (d as f64).sqrt() as usize,
            FeatureRule::Third => d / 3,
            FeatureRule::Count(n) => n,
        };
        m.clamp(1, d.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub features_per_split: FeatureRule,
    pub seed: u64,
    /// Draw a bootstrap sample per tree. Turning this off is a test hook.
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: None,
            min_samples_leaf: 1,
            features_per_split: FeatureRule::Auto,
            seed: crate::seed::DEFAULT_SEED,
            bootstrap: true,
        }
    }
}

impl ForestConfig {
    fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::validation("forest needs at least one tree"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::validation("min_samples_leaf must be at least 1"));
        }
        Ok(())
    }
}

/// Bagged CART ensemble.
#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    /// Sorted class labels; empty for regression.
    classes: Vec<usize>,
    n_features: usize,
    oob_score: Option<f64>,
}

impl RandomForest {
    pub fn fit_classifier(x: &DenseMatrix, y: &[usize], cfg: &ForestConfig) -> Result<RandomForest> {
        cfg.validate()?;
        check_training_shape(x.n_rows(), y.len())?;
        let (classes, idx) = encode_classes(y);
        check_classes(&classes)?;
        let target = Target::Class { y: &idx, k: classes.len() };
        let (mut trees, oob) = fit_trees(x, target, cfg, true);
        for t in &mut trees {
            t.set_classes(classes.clone());
        }
        let mut forest = RandomForest { trees, classes, n_features: x.n_cols(), oob_score: None };
        // Out-of-bag accuracy over samples left out of at least one tree.
        let (mut pred, mut truth) = (Vec::new(), Vec::new());
        for (i, trees) in oob.iter().enumerate() {
            if trees.is_empty() {
                continue;
            }
            let votes: Vec<usize> = trees.iter().map(|&t| forest.trees[t].leaf_value(x.row(i)) as usize).collect();
            pred.push(forest.vote(&votes));
            truth.push(idx[i]);
        }
        if !pred.is_empty() {
            forest.oob_score = Some(accuracy(&pred, &truth));
        }
        Ok(forest)
    }

    pub fn fit_regressor(x: &DenseMatrix, y: &[f64], cfg: &ForestConfig) -> Result<RandomForest> {
        cfg.validate()?;
        check_training_shape(x.n_rows(), y.len())?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("regression targets must be finite"));
        }
        let (trees, oob) = fit_trees(x, Target::Real(y), cfg, false);
        let mut forest = RandomForest { trees, classes: Vec::new(), n_features: x.n_cols(), oob_score: None };
        // Out-of-bag R².
        let (mut sse, mut seen) = (0.0, Vec::new());
        for (i, trees) in oob.iter().enumerate() {
            if trees.is_empty() {
                continue;
            }
            let p = trees.iter().map(|&t| forest.trees[t].leaf_value(x.row(i))).sum::<f64>() / trees.len() as f64;
            sse += (p - y[i]).powi(2);
            seen.push(y[i]);
        }
        if !seen.is_empty() {
            let mean = seen.iter().sum::<f64>() / seen.len() as f64;
            let sst: f64 = seen.iter().map(|v| (v - mean).powi(2)).sum();
            forest.oob_score = Some(if sst > 0.0 { 1.0 - sse / sst } else { 0.0 });
        }
        Ok(forest)
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn is_classifier(&self) -> bool {
        !self.classes.is_empty()
    }

    /// Out-of-bag accuracy (classification) or R² (regression); `None`
    /// without bootstrap or when every sample was drawn by every tree.
    pub fn oob_score(&self) -> Option<f64> {
        self.oob_score
    }

    fn vote(&self, class_idx: &[usize]) -> usize {
        let mut counts = vec![0usize; self.classes.len()];
        for &c in class_idx {
            counts[c] += 1;
        }
        let mut best = 0;
        for (c, &n) in counts.iter().enumerate() {
            if n > counts[best] {
                best = c;
            }
        }
        best
    }

    /// Majority vote; ties go to the lowest class.
    pub fn predict_class(&self, x: &DenseMatrix) -> Result<Vec<usize>> {
        if !self.is_classifier() {
            return Err(Error::validation("predict_class on a regression forest"));
        }
        check_dim(self.n_features, x.n_cols())?;
        Ok((0..x.n_rows())
            .map(|r| {
                let votes: Vec<usize> = self.trees.iter().map(|t| t.leaf_value(x.row(r)) as usize).collect();
                self.classes[self.vote(&votes)]
            })
            .collect())
    }

    /// Mean of the tree predictions.
    pub fn predict_value(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        if self.is_classifier() {
            return Err(Error::validation("predict_value on a classification forest"));
        }
        check_dim(self.n_features, x.n_cols())?;
        let n = self.trees.len() as f64;
        Ok((0..x.n_rows()).map(|r| self.trees.iter().map(|t| t.leaf_value(x.row(r))).sum::<f64>() / n).collect())
    }

    /// Mean decrease in impurity per feature, averaged over trees and
    /// normalized to sum to 1; uniform when no tree ever split.
    pub fn gini_importances(&self) -> Vec<f64> {
        let d = self.n_features;
        let mut acc = vec![0.0; d];
        for t in &self.trees {
            for (a, v) in acc.iter_mut().zip(t.importance()) {
                *a += v;
            }
        }
        let total: f64 = acc.iter().sum();
        if total <= 0.0 || d == 0 {
            return vec![1.0 / d.max(1) as f64; d];
        }
        acc.iter().map(|a| a / total).collect()
    }
}

/// Fits all trees in parallel. Returns the trees and, per sample, the trees
/// for which it was out of bag.
fn fit_trees(
    x: &DenseMatrix,
    target: Target<'_>,
    cfg: &ForestConfig,
    classify: bool,
) -> (Vec<DecisionTree>, Vec<Vec<usize>>) {
    let n = x.n_rows();
    let m = cfg.features_per_split.resolve(x.n_cols(), classify);
    let tree_cfg =
        TreeConfig { max_depth: cfg.max_depth, min_samples_leaf: cfg.min_samples_leaf, max_features: Some(m) };
    let fitted: Vec<(DecisionTree, Vec<bool>)> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(child_seed(cfg.seed, t as u64), &[b"forest-tree"]);
            let mut in_bag = vec![!cfg.bootstrap; n];
            let samples: Vec<usize> = if cfg.bootstrap {
                (0..n)
                    .map(|_| {
                        let i = rng.random_range(0..n);
                        in_bag[i] = true;
                        i
                    })
                    .collect()
            } else {
                (0..n).collect()
            };
            (grow(x, target, samples, &tree_cfg, Some(&mut rng)), in_bag)
        })
        .collect();
    let mut oob = vec![Vec::new(); n];
    let mut trees = Vec::with_capacity(fitted.len());
    for (t, (tree, in_bag)) in fitted.into_iter().enumerate() {
        for (i, b) in in_bag.iter().enumerate() {
            if !b {
                oob[i].push(t);
            }
        }
        trees.push(tree);
    }
    (trees, oob)
}
