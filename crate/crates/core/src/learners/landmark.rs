//! Cheap classifiers whose accuracies act as meta-features.

use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeConfig};
use super::{argmax, check_classes, check_dim, check_training_shape, encode_classes, Classifier};
use crate::error::Result;
use crate::numerics::{CsrMatrix, DenseMatrix};

/// Depth cap of the decision-tree landmarker.
pub const LANDMARK_TREE_DEPTH: usize = 10;
/// Floor added to the pooled variance of the diagonal discriminant.
pub const DIAG_LDA_VARIANCE_FLOOR: f64 = 1e-6;
/// Laplace smoothing of the multinomial Bayes landmarker.
pub const NB_ALPHA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandmarkerKind {
    Knn1,
    DecisionTree,
    DiagLda,
    NaiveBayes,
}

impl LandmarkerKind {
    pub const ALL: [LandmarkerKind; 4] =
        [LandmarkerKind::Knn1, LandmarkerKind::DecisionTree, LandmarkerKind::DiagLda, LandmarkerKind::NaiveBayes];
}

pub fn fit_landmarker(kind: LandmarkerKind, x: &CsrMatrix, y: &[usize]) -> Result<Box<dyn Classifier>> {
    Ok(match kind {
        LandmarkerKind::Knn1 => Box::new(Knn1::fit(x, y)?),
        LandmarkerKind::DecisionTree => Box::new(TreeLandmarker::fit(x, y)?),
        LandmarkerKind::DiagLda => Box::new(DiagLda::fit(x, y)?),
        LandmarkerKind::NaiveBayes => Box::new(MultinomialNb::fit(x, y)?),
    })
}

/// Single nearest neighbour under Euclidean distance; ties go to the lowest
/// training index.
#[derive(Debug, Clone)]
pub struct Knn1 {
    train: CsrMatrix,
    sq_norms: Vec<f64>,
    labels: Vec<usize>,
    classes: Vec<usize>,
}

impl Knn1 {
    pub fn fit(x: &CsrMatrix, y: &[usize]) -> Result<Knn1> {
        check_training_shape(x.n_rows(), y.len())?;
        let (classes, _) = encode_classes(y);
        check_classes(&classes)?;
        Ok(Knn1 {
            sq_norms: (0..x.n_rows()).map(|i| x.row_sq_norm(i)).collect(),
            train: x.clone(),
            labels: y.to_vec(),
            classes,
        })
    }
}

impl Classifier for Knn1 {
    fn n_features(&self) -> usize {
        self.train.n_cols()
    }

    fn classes(&self) -> &[usize] {
        &self.classes
    }

    fn predict(&self, x: &CsrMatrix) -> Result<Vec<usize>> {
        check_dim(self.train.n_cols(), x.n_cols())?;
        let mut dense = vec![0.0; x.n_cols()];
        let mut out = Vec::with_capacity(x.n_rows());
        for r in 0..x.n_rows() {
            let (idx, val) = x.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                dense[c] = v;
            }
            let q = x.row_sq_norm(r);
            let mut best = (f64::INFINITY, 0usize);
            for i in 0..self.train.n_rows() {
                let dist = (q + self.sq_norms[i] - 2.0 * self.train.row_dot(i, &dense)).max(0.0);
                if dist < best.0 {
                    best = (dist, i);
                }
            }
            for &c in idx {
                dense[c] = 0.0;
            }
            out.push(self.labels[best.1]);
        }
        Ok(out)
    }
}

/// Depth-limited CART on densified rows.
#[derive(Debug, Clone)]
pub struct TreeLandmarker {
    tree: DecisionTree,
}

impl TreeLandmarker {
    pub fn fit(x: &CsrMatrix, y: &[usize]) -> Result<TreeLandmarker> {
        let cfg = TreeConfig { max_depth: Some(LANDMARK_TREE_DEPTH), min_samples_leaf: 1, max_features: None };
        Ok(TreeLandmarker { tree: DecisionTree::fit_classifier(&x.to_dense(), y, &cfg)? })
    }

    pub fn tree(&self) -> &DecisionTree {
        &self.tree
    }
}

impl Classifier for TreeLandmarker {
    fn n_features(&self) -> usize {
        self.tree.n_features()
    }

    fn classes(&self) -> &[usize] {
        self.tree.classes()
    }

    fn predict(&self, x: &CsrMatrix) -> Result<Vec<usize>> {
        check_dim(self.tree.n_features(), x.n_cols())?;
        // densify one row at a time to keep memory flat
        let mut row = vec![0.0; x.n_cols()];
        let mut out = Vec::with_capacity(x.n_rows());
        for r in 0..x.n_rows() {
            let (idx, val) = x.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                row[c] = v;
            }
            out.push(self.tree.classes()[self.tree.leaf_value(&row) as usize]);
            for &c in idx {
                row[c] = 0.0;
            }
        }
        Ok(out)
    }
}

/// Gaussian discriminant with a shared diagonal covariance. The score of
/// class c is linear in x: `Σ_j (x_j μ_cj − μ_cj²/2) / σ_j² + ln π_c`.
#[derive(Debug, Clone)]
pub struct DiagLda {
    classes: Vec<usize>,
    /// classes × features.
    coef: DenseMatrix,
    intercept: Vec<f64>,
}

impl DiagLda {
    pub fn fit(x: &CsrMatrix, y: &[usize]) -> Result<DiagLda> {
        check_training_shape(x.n_rows(), y.len())?;
        let (classes, idx) = encode_classes(y);
        check_classes(&classes)?;
        let (n, d, k) = (x.n_rows(), x.n_cols(), classes.len());
        let mut counts = vec![0usize; k];
        let mut means = DenseMatrix::zeros(k, d);
        for (i, &c) in idx.iter().enumerate() {
            counts[c] += 1;
            let (cols, vals) = x.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                means.row_mut(c)[j] += v;
            }
        }
        for c in 0..k {
            let m = counts[c] as f64;
            means.row_mut(c).iter_mut().for_each(|v| *v /= m);
        }
        // Σ (x − μ_c)² = Σ x² − n_c μ_c², accumulated per feature.
        let mut sq = vec![0.0; d];
        for i in 0..n {
            let (cols, vals) = x.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                sq[j] += v * v;
            }
        }
        for c in 0..k {
            for (s, &mu) in sq.iter_mut().zip(means.row(c)) {
                *s -= counts[c] as f64 * mu * mu;
            }
        }
        let dof = if n > k { (n - k) as f64 } else { n as f64 };
        let var: Vec<f64> = sq.iter().map(|s| s.max(0.0) / dof + DIAG_LDA_VARIANCE_FLOOR).collect();
        let mut coef = DenseMatrix::zeros(k, d);
        let mut intercept = Vec::with_capacity(k);
        for c in 0..k {
            let mut b = (counts[c] as f64 / n as f64).ln();
            for j in 0..d {
                let mu = means.get(c, j);
                coef.set(c, j, mu / var[j]);
                b -= 0.5 * mu * mu / var[j];
            }
            intercept.push(b);
        }
        Ok(DiagLda { classes, coef, intercept })
    }
}

impl Classifier for DiagLda {
    fn n_features(&self) -> usize {
        self.coef.n_cols()
    }

    fn classes(&self) -> &[usize] {
        &self.classes
    }

    fn predict(&self, x: &CsrMatrix) -> Result<Vec<usize>> {
        check_dim(self.coef.n_cols(), x.n_cols())?;
        Ok((0..x.n_rows())
            .map(|r| {
                let s: Vec<f64> =
                    (0..self.classes.len()).map(|c| x.row_dot(r, self.coef.row(c)) + self.intercept[c]).collect();
                self.classes[argmax(&s)]
            })
            .collect())
    }
}

/// Multinomial naive Bayes with Laplace smoothing. Inputs are shifted by
/// the negated training minimum when that minimum is negative.
#[derive(Debug, Clone)]
pub struct MultinomialNb {
    classes: Vec<usize>,
    shift: f64,
    /// classes × features, ln θ_cj.
    log_theta: DenseMatrix,
    log_prior: Vec<f64>,
}

impl MultinomialNb {
    pub fn fit(x: &CsrMatrix, y: &[usize]) -> Result<MultinomialNb> {
        check_training_shape(x.n_rows(), y.len())?;
        let (classes, idx) = encode_classes(y);
        check_classes(&classes)?;
        let (n, d, k) = (x.n_rows(), x.n_cols(), classes.len());
        let min = (0..n).flat_map(|i| x.row(i).1.iter().copied()).fold(0.0f64, f64::min);
        let shift = -min;
        let mut totals = DenseMatrix::zeros(k, d);
        let mut counts = vec![0usize; k];
        for (i, &c) in idx.iter().enumerate() {
            counts[c] += 1;
            let row = totals.row_mut(c);
            if shift > 0.0 {
                row.iter_mut().for_each(|v| *v += shift);
            }
            let (cols, vals) = x.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] += v;
            }
        }
        let mut log_theta = DenseMatrix::zeros(k, d);
        for c in 0..k {
            let total: f64 = totals.row(c).iter().sum();
            let denom = total + NB_ALPHA * d as f64;
            for j in 0..d {
                log_theta.set(c, j, ((totals.get(c, j) + NB_ALPHA) / denom).ln());
            }
        }
        let log_prior = counts.iter().map(|&m| (m as f64 / n as f64).ln()).collect();
        Ok(MultinomialNb { classes, shift, log_theta, log_prior })
    }

    /// `ln P(c) + Σ_j x_j ln θ_cj` per row and class.
    pub fn joint_log_likelihood(&self, x: &CsrMatrix) -> Result<Vec<Vec<f64>>> {
        check_dim(self.log_theta.n_cols(), x.n_cols())?;
        let k = self.classes.len();
        let row_sums: Vec<f64> = (0..k).map(|c| self.log_theta.row(c).iter().sum()).collect();
        Ok((0..x.n_rows())
            .map(|r| {
                (0..k)
                    .map(|c| {
                        let mut s = self.log_prior[c] + x.row_dot(r, self.log_theta.row(c));
                        if self.shift > 0.0 {
                            s += self.shift * row_sums[c];
                        }
                        s
                    })
                    .collect()
            })
            .collect())
    }

    /// Class probabilities per row, in class order.
    pub fn predict_proba(&self, x: &CsrMatrix) -> Result<Vec<Vec<f64>>> {
        Ok(self
            .joint_log_likelihood(x)?
            .into_iter()
            .map(|jll| {
                let m = jll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = jll.iter().map(|v| (v - m).exp()).collect();
                let z: f64 = e.iter().sum();
                e.into_iter().map(|v| v / z).collect()
            })
            .collect())
    }
}

impl Classifier for MultinomialNb {
    fn n_features(&self) -> usize {
        self.log_theta.n_cols()
    }

    fn classes(&self) -> &[usize] {
        &self.classes
    }

    fn predict(&self, x: &CsrMatrix) -> Result<Vec<usize>> {
        Ok(self.joint_log_likelihood(x)?.iter().map(|s| self.classes[argmax(s)]).collect())
    }
}
