//! L2-regularized hinge-loss linear SVM trained by dual coordinate descent.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{argmax, check_classes, check_dim, check_training_shape, encode_classes, Classifier};
use crate::error::{Error, Result};
use crate::numerics::CsrMatrix;
use crate::seed::rng_for;

#[derive(Debug, Clone, PartialEq)]
pub struct SvmConfig {
    pub c: f64,
    /// Stop once the relative duality gap falls below this.
    pub tol: f64,
    /// Maximum number of epochs over the data.
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig { c: 1.0, tol: 1e-3, max_iter: 1000, seed: crate::seed::DEFAULT_SEED }
    }
}

/// One-vs-rest linear SVM. With two classes a single binary problem is
/// solved, class 1 being the positive side.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    classes: Vec<usize>,
    n_features: usize,
    /// Per binary problem: feature weights followed by the bias.
    weights: Vec<Vec<f64>>,
    /// Per binary problem: dual objective `½‖w‖² − Σα` after each epoch.
    traces: Vec<Vec<f64>>,
}

pub fn fit_linear_svm(x: &CsrMatrix, y: &[usize], cfg: &SvmConfig) -> Result<LinearSvm> {
    check_training_shape(x.n_rows(), y.len())?;
    if !(cfg.c > 0.0) || !(cfg.tol > 0.0) || cfg.max_iter == 0 {
        return Err(Error::validation("SVM needs C > 0, tol > 0 and max_iter >= 1"));
    }
    let (classes, idx) = encode_classes(y);
    check_classes(&classes)?;
    let problems: Vec<usize> = if classes.len() == 2 { vec![1] } else { (0..classes.len()).collect() };
    let solved: Vec<(Vec<f64>, Vec<f64>)> = problems
        .par_iter()
        .map(|&pos| {
            let signs: Vec<f64> = idx.iter().map(|&c| if c == pos { 1.0 } else { -1.0 }).collect();
            solve_binary(x, &signs, cfg, pos)
        })
        .collect();
    let (weights, traces) = solved.into_iter().unzip();
    Ok(LinearSvm { classes, n_features: x.n_cols(), weights, traces })
}

fn solve_binary(x: &CsrMatrix, y: &[f64], cfg: &SvmConfig, problem: usize) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = (x.n_rows(), x.n_cols());
    let mut w = vec![0.0; d + 1];
    let mut alpha = vec![0.0; n];
    let qii: Vec<f64> = (0..n).map(|i| x.row_sq_norm(i) + 1.0).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng_for(cfg.seed, &[b"linear-svm", &(problem as u64).to_le_bytes()]);
    let mut trace = Vec::new();
    let margin = |w: &[f64], i: usize| x.row_dot(i, &w[..d]) + w[d];
    for _ in 0..cfg.max_iter {
        order.shuffle(&mut rng);
        for &i in &order {
            let g = y[i] * margin(&w, i) - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == cfg.c {
                g.max(0.0)
            } else {
                g
            };
            if pg == 0.0 {
                continue;
            }
            let new = (alpha[i] - g / qii[i]).clamp(0.0, cfg.c);
            let delta = (new - alpha[i]) * y[i];
            if delta != 0.0 {
                let (idx, val) = x.row(i);
                for (&c, &v) in idx.iter().zip(val) {
                    w[c] += delta * v;
                }
                w[d] += delta;
            }
            alpha[i] = new;
        }
        let half_sq = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
        let dual = half_sq - alpha.iter().sum::<f64>();
        trace.push(dual);
        let hinge: f64 = (0..n).map(|i| (1.0 - y[i] * margin(&w, i)).max(0.0)).sum();
        let primal = half_sq + cfg.c * hinge;
        // dual is stored negated, so the gap is primal + dual
        if primal + dual <= cfg.tol * primal.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    (w, trace)
}

impl LinearSvm {
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Dual objective after each epoch, one trace per binary problem.
    pub fn objective_traces(&self) -> &[Vec<f64>] {
        &self.traces
    }

    /// Raw decision values, one column per binary problem.
    pub fn decision_function(&self, x: &CsrMatrix) -> Result<Vec<Vec<f64>>> {
        check_dim(self.n_features, x.n_cols())?;
        let d = self.n_features;
        Ok((0..x.n_rows()).map(|r| self.weights.iter().map(|w| x.row_dot(r, &w[..d]) + w[d]).collect()).collect())
    }
}

impl Classifier for LinearSvm {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn classes(&self) -> &[usize] {
        &self.classes
    }

    fn predict(&self, x: &CsrMatrix) -> Result<Vec<usize>> {
        let scores = self.decision_function(x)?;
        Ok(scores
            .iter()
            .map(
                |s| {
                    if self.classes.len() == 2 {
                        self.classes[usize::from(s[0] > 0.0)]
                    } else {
                        self.classes[argmax(s)]
                    }
                },
            )
            .collect())
    }
}
