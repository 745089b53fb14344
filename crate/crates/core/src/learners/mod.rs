//! Classifiers and regressors used for evaluation, landmarking and
//! recommendation: a linear SVM, four landmarkers, CART trees and random
//! forests with Gini importances.
//!
//! Labels are arbitrary `usize` values; every classifier keeps the sorted
//! list of classes it saw and only ever predicts one of them.

mod forest;
mod landmark;
mod svm;
mod tree;

use crate::error::{Error, Result};
use crate::numerics::CsrMatrix;

pub use forest::{FeatureRule, ForestConfig, RandomForest};
pub use landmark::{
    fit_landmarker, DiagLda, Knn1, LandmarkerKind, MultinomialNb, TreeLandmarker, DIAG_LDA_VARIANCE_FLOOR,
    LANDMARK_TREE_DEPTH, NB_ALPHA,
};
pub use svm::{fit_linear_svm, LinearSvm, SvmConfig};
pub use tree::{DecisionTree, Node, TreeConfig};

/// A fitted classifier over sparse rows.
pub trait Classifier: Send + Sync {
    fn n_features(&self) -> usize;
    fn classes(&self) -> &[usize];
    fn predict(&self, x: &CsrMatrix) -> Result<Vec<usize>>;
}

/// Any fitted model, for callers that need to dispatch on the kind.
#[derive(Debug, Clone)]
pub enum TrainedModel {
    LinearSvm(LinearSvm),
    Knn1(Knn1),
    DecisionTree(TreeLandmarker),
    DiagLda(DiagLda),
    NaiveBayes(MultinomialNb),
    RfClassifier(RandomForest),
    RfRegressor(RandomForest),
}

impl TrainedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            TrainedModel::LinearSvm(_) => "linear_svm",
            TrainedModel::Knn1(_) => "knn1",
            TrainedModel::DecisionTree(_) => "decision_tree",
            TrainedModel::DiagLda(_) => "diag_lda",
            TrainedModel::NaiveBayes(_) => "naive_bayes",
            TrainedModel::RfClassifier(_) => "rf_classifier",
            TrainedModel::RfRegressor(_) => "rf_regressor",
        }
    }
}

/// Mean decrease in impurity per feature of a fitted forest.
pub fn gini_importances(model: &TrainedModel) -> Result<Vec<f64>> {
    match model {
        TrainedModel::RfClassifier(f) | TrainedModel::RfRegressor(f) => Ok(f.gini_importances()),
        other => Err(Error::validation(format!("Gini importances need a random forest, got {}", other.kind()))),
    }
}

/// Fraction of positions where `pred` equals `truth`.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(pred.len(), truth.len(), "prediction length mismatch");
    if truth.is_empty() {
        return 0.0;
    }
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

/// Accuracy of `model` on `(x, y)`.
pub fn score(model: &dyn Classifier, x: &CsrMatrix, y: &[usize]) -> Result<f64> {
    Ok(accuracy(&model.predict(x)?, y))
}

/// Sorted distinct labels and each sample's index into them.
pub(crate) fn encode_classes(y: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut classes = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let idx = y.iter().map(|c| classes.binary_search(c).expect("present")).collect();
    (classes, idx)
}

pub(crate) fn check_training_shape(rows: usize, labels: usize) -> Result<()> {
    if rows == 0 {
        return Err(Error::validation("cannot fit on empty data"));
    }
    if rows != labels {
        return Err(Error::validation(format!("{rows} rows but {labels} targets")));
    }
    Ok(())
}

pub(crate) fn check_classes(classes: &[usize]) -> Result<()> {
    if classes.len() < 2 {
        return Err(Error::validation(format!("classification needs at least 2 classes, got {}", classes.len())));
    }
    Ok(())
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::validation(format!("model was fitted on {expected} features, input has {found}")));
    }
    Ok(())
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests;
