//! Online phase: map a new corpus's meta-features to a representation.
//!
//! Four strategies learn from a knowledge base: the best representation of
//! the nearest corpus, a random-forest classifier over best representations,
//! and per-representation random-forest regressors of error or of rank.
//! Every strategy reads the knowledge base through a [`KbView`], which
//! selects rows, meta-feature columns and representation columns.

use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knowledgebase::KnowledgeBase;
use crate::learners::{ForestConfig, RandomForest};
use crate::metafeatures::{MetaFeatureVector, N_META_FEATURES};
use crate::numerics::DenseMatrix;
use crate::represent::RepresentationSpec;
use crate::seed::child_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Nearest,
    Classify,
    RegressError,
    RegressRank,
}

impl Strategy {
    pub const ALL: [Strategy; 4] =
        [Strategy::Nearest, Strategy::Classify, Strategy::RegressError, Strategy::RegressRank];

    /// Command-line spelling.
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Nearest => "nearest",
            Strategy::Classify => "classify",
            Strategy::RegressError => "regress-error",
            Strategy::RegressRank => "regress-rank",
        }
    }

    /// Whether results depend on the forest seed.
    pub fn is_stochastic(self) -> bool {
        self != Strategy::Nearest
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('_', "-").as_str() {
            "nearest" => Ok(Strategy::Nearest),
            "classify" => Ok(Strategy::Classify),
            "regress-error" => Ok(Strategy::RegressError),
            "regress-rank" => Ok(Strategy::RegressRank),
            _ => Err(Error::validation(format!(
                "unknown strategy '{s}' (expected nearest, classify, regress-error or regress-rank)"
            ))),
        }
    }
}

/// Records which knowledge-base rows enter standardizer and model fitting.
#[derive(Debug, Default)]
pub struct FitAudit {
    rows: Mutex<Vec<usize>>,
}

impl FitAudit {
    pub fn new() -> Self {
        Self::default()
    }

    fn record(&self, rows: &[usize]) {
        self.rows.lock().expect("audit lock").extend_from_slice(rows);
    }

    /// Every row index recorded so far, sorted and deduplicated.
    pub fn rows(&self) -> Vec<usize> {
        let mut r = self.rows.lock().expect("audit lock").clone();
        r.sort_unstable();
        r.dedup();
        r
    }
}

/// A selection of rows, meta-feature columns and representations of a
/// knowledge base.
#[derive(Debug, Clone)]
pub struct KbView<'a> {
    kb: &'a KnowledgeBase,
    rows: Vec<usize>,
    features: Vec<usize>,
    reps: Vec<usize>,
    audit: Option<&'a FitAudit>,
}

impl<'a> KbView<'a> {
    pub fn full(kb: &'a KnowledgeBase) -> Self {
        KbView {
            kb,
            rows: (0..kb.n_corpora()).collect(),
            features: (0..N_META_FEATURES).collect(),
            reps: (0..kb.n_representations()).collect(),
            audit: None,
        }
    }

    pub fn kb(&self) -> &'a KnowledgeBase {
        self.kb
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn features(&self) -> &[usize] {
        &self.features
    }

    pub fn representations(&self) -> &[usize] {
        &self.reps
    }

    /// All rows except `row`.
    pub fn without_row(mut self, row: usize) -> Self {
        self.rows.retain(|&r| r != row);
        self
    }

    /// Restricts meta-features to the given canonical indices.
    pub fn with_features(mut self, features: Vec<usize>) -> Result<Self> {
        if features.is_empty() || features.iter().any(|&f| f >= N_META_FEATURES) {
            return Err(Error::validation("feature subset must be non-empty canonical indices"));
        }
        self.features = features;
        Ok(self)
    }

    /// Restricts candidate representations to the given ids.
    pub fn with_representations(mut self, reps: Vec<usize>) -> Result<Self> {
        if reps.is_empty() || reps.iter().any(|&r| r >= self.kb.n_representations()) {
            return Err(Error::validation("representation subset must be non-empty valid ids"));
        }
        self.reps = reps;
        Ok(self)
    }

    pub fn with_audit(mut self, audit: &'a FitAudit) -> Self {
        self.audit = Some(audit);
        self
    }

    /// Meta rows restricted to the selected features. Every fitting path
    /// reads training rows through here, so the audit sees them all.
    fn training_meta(&self) -> Vec<Vec<f64>> {
        if let Some(a) = self.audit {
            a.record(&self.rows);
        }
        self.rows.iter().map(|&r| self.select(&self.kb.meta[r])).collect()
    }

    fn select(&self, full: &[f64]) -> Vec<f64> {
        self.features.iter().map(|&f| full[f]).collect()
    }

    /// Lowest selected representation id with the best rank in `row`.
    fn best_in_row(&self, row: usize) -> usize {
        let ranks = &self.kb.rank[row];
        let best = self.reps.iter().map(|&r| ranks[r]).fold(f64::INFINITY, f64::min);
        *self.reps.iter().filter(|&&r| ranks[r] == best).min().expect("non-empty")
    }
}

/// Per-feature z-scoring learned from knowledge-base rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Positions (within the input vector) of the features kept.
    pub kept: Vec<usize>,
    /// Positions of constant features.
    pub dropped: Vec<usize>,
}

impl Standardizer {
    /// Population mean and standard deviation per column; columns whose
    /// values are all equal are dropped.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Standardizer> {
        if rows.len() < 2 {
            return Err(Error::validation(format!("standardizing needs at least 2 rows, got {}", rows.len())));
        }
        let d = rows[0].len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::validation("rows differ in length"));
        }
        let n = rows.len() as f64;
        let (mut mean, mut std, mut kept, mut dropped) = (vec![0.0; d], vec![0.0; d], Vec::new(), Vec::new());
        for j in 0..d {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            mean[j] = col.iter().sum::<f64>() / n;
            std[j] = (col.iter().map(|v| (v - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
            if col.iter().all(|&v| v == col[0]) || std[j] == 0.0 {
                dropped.push(j);
            } else {
                kept.push(j);
            }
        }
        Ok(Standardizer { mean, std, kept, dropped })
    }

    /// Z-scores of the kept features of `v`.
    pub fn transform(&self, v: &[f64]) -> Vec<f64> {
        self.kept.iter().map(|&j| (v[j] - self.mean[j]) / self.std[j]).collect()
    }
}

/// Strategy-specific evidence behind a recommendation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostics {
    /// Distance to each knowledge-base corpus, aligned with `corpora`.
    Distances {
        corpora: Vec<String>,
        distances: Vec<f64>,
    },
    /// Fraction of trees voting for each candidate representation.
    Votes {
        representations: Vec<usize>,
        votes: Vec<f64>,
    },
    /// All knowledge-base rows share one best representation.
    Unanimous,
    PredictedErrors {
        representations: Vec<usize>,
        errors: Vec<f64>,
        accuracies: Vec<f64>,
    },
    PredictedRanks {
        representations: Vec<usize>,
        ranks: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub strategy: Strategy,
    pub representation_id: usize,
    pub representation: String,
    pub spec: RepresentationSpec,
    pub diagnostics: Diagnostics,
    pub seed: u64,
}

impl Recommendation {
    fn new(view: &KbView, strategy: Strategy, id: usize, diagnostics: Diagnostics, seed: u64) -> Self {
        let spec = view.kb.representations[id].clone();
        Recommendation { strategy, representation_id: id, representation: spec.describe(), spec, diagnostics, seed }
    }
}

/// Runs `strategy` for a full 72-entry meta vector.
pub fn recommend(view: &KbView, query: &[f64], strategy: Strategy, cfg: &ForestConfig) -> Result<Recommendation> {
    if query.len() != N_META_FEATURES || query.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("query must be 72 finite meta-feature values"));
    }
    match strategy {
        Strategy::Nearest => recommend_nearest(view, query),
        Strategy::Classify => recommend_classify(view, query, cfg),
        Strategy::RegressError => recommend_regress(view, query, cfg, Target::Error),
        Strategy::RegressRank => recommend_regress(view, query, cfg, Target::Rank),
    }
}

/// Convenience wrapper over a full knowledge base.
pub fn recommend_for(
    kb: &KnowledgeBase,
    meta: &MetaFeatureVector,
    strategy: Strategy,
    cfg: &ForestConfig,
) -> Result<Recommendation> {
    recommend(&KbView::full(kb), &meta.values, strategy, cfg)
}

/// Standardized training matrix and query. With no informative feature a
/// single zero column stands in, so forests fall back to target means.
fn standardized(view: &KbView, query: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let raw = view.training_meta();
    let s = Standardizer::fit(&raw)?;
    if s.kept.is_empty() {
        return Ok((vec![vec![0.0]; raw.len()], vec![0.0]));
    }
    Ok((raw.iter().map(|r| s.transform(r)).collect(), s.transform(&view.select(query))))
}

/// Strategy 1: best representation of the nearest corpus.
pub fn recommend_nearest(view: &KbView, query: &[f64]) -> Result<Recommendation> {
    let (x, q) = standardized(view, query)?;
    let distances: Vec<f64> =
        x.iter().map(|r| r.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()).collect();
    let mut nearest = 0;
    for (i, &d) in distances.iter().enumerate() {
        if d < distances[nearest] {
            nearest = i;
        }
    }
    let id = view.best_in_row(view.rows[nearest]);
    let diag =
        Diagnostics::Distances { corpora: view.rows.iter().map(|&r| view.kb.corpora[r].clone()).collect(), distances };
    Ok(Recommendation::new(view, Strategy::Nearest, id, diag, 0))
}

/// Strategy 2: random-forest classification of the best representation.
pub fn recommend_classify(view: &KbView, query: &[f64], cfg: &ForestConfig) -> Result<Recommendation> {
    let (x, q) = standardized(view, query)?;
    let labels: Vec<usize> = view.rows.iter().map(|&r| view.best_in_row(r)).collect();
    if labels.iter().all(|&l| l == labels[0]) {
        log::info!("every knowledge-base row has best representation {}; returning it", labels[0]);
        return Ok(Recommendation::new(view, Strategy::Classify, labels[0], Diagnostics::Unanimous, cfg.seed));
    }
    let forest = RandomForest::fit_classifier(&DenseMatrix::from_rows(&x)?, &labels, cfg)?;
    let qm = DenseMatrix::from_rows(&[q])?;
    let id = forest.predict_class(&qm)?[0];
    let mut candidates = labels.clone();
    candidates.sort_unstable();
    candidates.dedup();
    let mut votes = vec![0.0; candidates.len()];
    for t in forest.trees() {
        let c = t.predict_class(&qm)?[0];
        votes[candidates.binary_search(&c).expect("tree predicts a training class")] += 1.0;
    }
    votes.iter_mut().for_each(|v| *v /= forest.n_trees() as f64);
    let diag = Diagnostics::Votes { representations: candidates, votes };
    Ok(Recommendation::new(view, Strategy::Classify, id, diag, cfg.seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Error,
    Rank,
}

/// Strategies 3 and 4: one forest regressor per candidate representation,
/// recommending the smallest prediction (ties to the lowest id).
fn recommend_regress(view: &KbView, query: &[f64], cfg: &ForestConfig, target: Target) -> Result<Recommendation> {
    let (x, q) = standardized(view, query)?;
    let xm = DenseMatrix::from_rows(&x)?;
    let qm = DenseMatrix::from_rows(&[q])?;
    let predictions: Vec<f64> = view
        .reps
        .par_iter()
        .map(|&r| {
            let y: Vec<f64> = view
                .rows
                .iter()
                .map(|&i| match target {
                    Target::Error => 1.0 - view.kb.accuracy[i][r],
                    Target::Rank => view.kb.rank[i][r],
                })
                .collect();
            let rcfg = ForestConfig { seed: child_seed(cfg.seed, r as u64), ..cfg.clone() };
            Ok(RandomForest::fit_regressor(&xm, &y, &rcfg)?.predict_value(&qm)?[0])
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (k, &p) in predictions.iter().enumerate() {
        let (cur, bid) = (predictions[best], view.reps[best]);
        if p < cur || (p == cur && view.reps[k] < bid) {
            best = k;
        }
    }
    let id = view.reps[best];
    let representations = view.reps.clone();
    let (strategy, diag) = match target {
        Target::Error => (
            Strategy::RegressError,
            Diagnostics::PredictedErrors {
                representations,
                accuracies: predictions.iter().map(|e| 1.0 - e).collect(),
                errors: predictions,
            },
        ),
        Target::Rank => (Strategy::RegressRank, Diagnostics::PredictedRanks { representations, ranks: predictions }),
    };
    Ok(Recommendation::new(view, strategy, id, diag, cfg.seed))
}
