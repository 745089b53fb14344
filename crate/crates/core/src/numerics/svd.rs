//! Randomized truncated SVD and PCA over implicit linear operators.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::matrix::{CsrMatrix, DenseMatrix};
use crate::error::{Error, Result};
use crate::seed::rng_for;

/// Extra sampled directions beyond the requested rank.
pub const OVERSAMPLING: usize = 10;
/// Subspace (power) iterations.
pub const POWER_ITERATIONS: usize = 7;

/// A matrix accessed only through products with dense blocks.
pub trait LinearOperator {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    /// `A x`, with `x` of shape n_cols × l.
    fn apply(&self, x: &DenseMatrix) -> DenseMatrix;
    /// `Aᵀ y`, with `y` of shape n_rows × l.
    fn apply_t(&self, y: &DenseMatrix) -> DenseMatrix;
}

impl LinearOperator for CsrMatrix {
    fn n_rows(&self) -> usize {
        CsrMatrix::n_rows(self)
    }
    fn n_cols(&self) -> usize {
        CsrMatrix::n_cols(self)
    }
    fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        self.mul_dense(x)
    }
    fn apply_t(&self, y: &DenseMatrix) -> DenseMatrix {
        self.tmul_dense(y)
    }
}

impl LinearOperator for DenseMatrix {
    fn n_rows(&self) -> usize {
        DenseMatrix::n_rows(self)
    }
    fn n_cols(&self) -> usize {
        DenseMatrix::n_cols(self)
    }
    fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        self.matmul(x)
    }
    fn apply_t(&self, y: &DenseMatrix) -> DenseMatrix {
        self.transpose().matmul(y)
    }
}

/// `A − 1 μᵀ` for a sparse `A` and its column means `μ`, never densified.
pub struct Centered<'a> {
    inner: &'a CsrMatrix,
    means: Vec<f64>,
}

impl<'a> Centered<'a> {
    pub fn new(inner: &'a CsrMatrix) -> Self {
        Centered { means: inner.column_means(), inner }
    }
}

impl LinearOperator for Centered<'_> {
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }
    fn n_cols(&self) -> usize {
        self.inner.n_cols()
    }
    fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        let mut out = self.inner.mul_dense(x);
        let l = x.n_cols();
        let mut shift = vec![0.0; l];
        for (c, &mu) in self.means.iter().enumerate() {
            if mu != 0.0 {
                for (s, &v) in shift.iter_mut().zip(x.row(c)) {
                    *s += mu * v;
                }
            }
        }
        for r in 0..out.n_rows() {
            for (o, s) in out.row_mut(r).iter_mut().zip(&shift) {
                *o -= s;
            }
        }
        out
    }
    fn apply_t(&self, y: &DenseMatrix) -> DenseMatrix {
        let mut out = self.inner.tmul_dense(y);
        let l = y.n_cols();
        let mut col_sums = vec![0.0; l];
        for r in 0..y.n_rows() {
            for (s, &v) in col_sums.iter_mut().zip(y.row(r)) {
                *s += v;
            }
        }
        for (c, &mu) in self.means.iter().enumerate() {
            if mu != 0.0 {
                for (o, s) in out.row_mut(c).iter_mut().zip(&col_sums) {
                    *o -= mu * s;
                }
            }
        }
        out
    }
}

/// Top-k singular triplets. `u` is n_rows × k and `v` is n_cols × k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvdResult {
    pub singular_values: Vec<f64>,
    pub u: DenseMatrix,
    pub v: DenseMatrix,
}

/// Randomized truncated SVD of a sparse matrix.
pub fn truncated_svd(m: &CsrMatrix, k: usize, seed: u64) -> Result<SvdResult> {
    truncated_svd_op(m, k, seed)
}

/// Randomized subspace iteration: Gaussian sketch with
/// [`OVERSAMPLING`] extra columns, [`POWER_ITERATIONS`] re-orthonormalized
/// power steps, then an exact SVD of the small projected matrix.
pub fn truncated_svd_op<A: LinearOperator + ?Sized>(a: &A, k: usize, seed: u64) -> Result<SvdResult> {
    let (m, n) = (a.n_rows(), a.n_cols());
    let kmax = m.min(n);
    if k == 0 || k > kmax {
        return Err(Error::validation(format!("truncated SVD rank {k} outside 1..={kmax} for a {m}x{n} matrix")));
    }
    let l = (k + OVERSAMPLING).min(kmax);
    let mut rng = rng_for(seed, &[b"truncated_svd"]);
    let mut omega = DenseMatrix::zeros(n, l);
    for r in 0..n {
        for v in omega.row_mut(r) {
            *v = rng.sample(StandardNormal);
        }
    }
    let mut q = orthonormal_columns(&a.apply(&omega), &mut rng);
    for _ in 0..POWER_ITERATIONS {
        let z = orthonormal_columns(&a.apply_t(&q), &mut rng);
        q = orthonormal_columns(&a.apply(&z), &mut rng);
    }
    // Bᵀ = Aᵀ Q (n × l); Bᵀ = W Σ Vsᵀ gives A ≈ (Q Vs) Σ Wᵀ.
    let bt = a.apply_t(&q);
    let (w, sigma, vs) = jacobi_svd(&bt);

    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));
    order.truncate(k);

    let u_full = q.matmul(&vs);
    let singular_values: Vec<f64> = order.iter().map(|&j| sigma[j]).collect();
    let u = u_full.select_columns(&order);
    let mut v = w.select_columns(&order);
    complete_degenerate_columns(&mut v, &singular_values, &mut rng);
    Ok(SvdResult { singular_values, u, v })
}

/// Replaces right singular vectors of (numerically) zero singular values
/// with unit vectors orthogonal to all other columns.
fn complete_degenerate_columns(v: &mut DenseMatrix, sigma: &[f64], rng: &mut ChaCha8Rng) {
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    let degenerate: Vec<bool> = sigma.iter().map(|&s| s <= smax * 1e-12 || s == 0.0).collect();
    if !degenerate.iter().any(|&d| d) {
        return;
    }
    let mut cols = v.transpose();
    let n = cols.n_cols();
    for j in 0..cols.n_rows() {
        if !degenerate[j] {
            continue;
        }
        let fixed: Vec<usize> = (0..cols.n_rows()).filter(|&i| !degenerate[i] || i < j).collect();
        let fresh = random_orthogonal(&cols, &fixed, n, rng);
        cols.row_mut(j).copy_from_slice(&fresh);
    }
    *v = cols.transpose();
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Random unit vector orthogonal to the listed rows of `basis`.
fn random_orthogonal(basis: &DenseMatrix, rows: &[usize], dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for &i in rows {
                let b = basis.row(i);
                let p = dot(b, &x);
                for (xv, bv) in x.iter_mut().zip(b) {
                    *xv -= p * bv;
                }
            }
        }
        let nrm = norm(&x);
        if nrm > 1e-8 {
            x.iter_mut().for_each(|v| *v /= nrm);
            return x;
        }
    }
}

/// Orthonormal basis for the column space of `y` (Gram–Schmidt with
/// re-orthogonalization). Rank-deficient directions are filled with random
/// orthogonal vectors so the result always has orthonormal columns.
pub(crate) fn orthonormal_columns(y: &DenseMatrix, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let mut q = y.transpose();
    let (l, m) = (q.n_rows(), q.n_cols());
    for j in 0..l {
        let original = norm(q.row(j));
        for _ in 0..2 {
            for i in 0..j {
                let p = dot(q.row(i), q.row(j));
                let (head, tail) = q.two_rows_mut(i, j);
                for (t, h) in tail.iter_mut().zip(head.iter()) {
                    *t -= p * h;
                }
            }
        }
        let nrm = norm(q.row(j));
        if original == 0.0 || nrm <= 1e-10 * original || !nrm.is_finite() {
            let prev: Vec<usize> = (0..j).collect();
            let fresh = random_orthogonal(&q, &prev, m, rng);
            q.row_mut(j).copy_from_slice(&fresh);
        } else {
            q.row_mut(j).iter_mut().for_each(|v| *v /= nrm);
        }
    }
    q.transpose()
}

/// One-sided (Hestenes) Jacobi SVD of a tall matrix `a` (n × l, n ≥ l).
/// Returns `(w, sigma, v)` with `a = w diag(sigma) vᵀ`; columns of `w` for
/// zero singular values are left at zero.
pub(crate) fn jacobi_svd(a: &DenseMatrix) -> (DenseMatrix, Vec<f64>, DenseMatrix) {
    let l = a.n_cols();
    let mut cols = a.transpose(); // row j = column j of a
    let mut v = DenseMatrix::zeros(l, l);
    for i in 0..l {
        v.set(i, i, 1.0);
    }
    let mut vt = v; // row j = column j of V
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..l {
            for q in p + 1..l {
                let alpha = dot(cols.row(p), cols.row(p));
                let beta = dot(cols.row(q), cols.row(q));
                let gamma = dot(cols.row(p), cols.row(q));
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut cols, p, q, c, s);
                rotate_rows(&mut vt, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma = Vec::with_capacity(l);
    for j in 0..l {
        let s = norm(cols.row(j));
        sigma.push(s);
        if s > 0.0 {
            cols.row_mut(j).iter_mut().for_each(|x| *x /= s);
        }
    }
    (cols.transpose(), sigma, vt.transpose())
}

fn rotate_rows(m: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let (rp, rq) = m.two_rows_mut(p, q);
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Explained variances of the principal components of a sparse matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    /// λᵢ = σᵢ² / (n − 1), descending.
    pub explained_variance: Vec<f64>,
    /// Singular values of the centered matrix, descending.
    pub singular_values: Vec<f64>,
    /// Sum of per-column sample variances.
    pub total_variance: f64,
}

/// PCA of `m` with implicit column centering. `k` is capped at
/// `min(n_rows − 1, n_cols)`.
pub fn pca_explained(m: &CsrMatrix, k: usize, seed: u64) -> Result<PcaResult> {
    let n = m.n_rows();
    if n < 2 {
        return Err(Error::validation(format!("PCA needs at least 2 rows, got {n}")));
    }
    let op = Centered::new(m);
    let total_variance = column_variance_sum(m, &op.means);
    let k = k.min(n - 1).min(m.n_cols());
    if k == 0 {
        return Ok(PcaResult { explained_variance: Vec::new(), singular_values: Vec::new(), total_variance });
    }
    let svd = truncated_svd_op(&op, k, seed)?;
    let denom = (n - 1) as f64;
    Ok(PcaResult {
        explained_variance: svd.singular_values.iter().map(|s| s * s / denom).collect(),
        singular_values: svd.singular_values,
        total_variance,
    })
}

fn column_variance_sum(m: &CsrMatrix, means: &[f64]) -> f64 {
    let n = m.n_rows();
    let mut sq = vec![0.0; m.n_cols()];
    let mut nnz = vec![0usize; m.n_cols()];
    for r in 0..n {
        let (idx, val) = m.row(r);
        for (&c, &v) in idx.iter().zip(val) {
            let d = v - means[c];
            sq[c] += d * d;
            nnz[c] += 1;
        }
    }
    let total: f64 = sq.iter().zip(&nnz).zip(means).map(|((s, &z), mu)| s + (n - z) as f64 * mu * mu).sum();
    total / (n - 1) as f64
}
