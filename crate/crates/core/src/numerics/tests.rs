use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::svd::{jacobi_svd, orthonormal_columns};
use super::*;

fn random_dense(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    DenseMatrix::from_vec(rows, cols, data).unwrap()
}

fn oracle_singular_values(m: &DenseMatrix) -> Vec<f64> {
    let nm = DMatrix::from_row_slice(m.n_rows(), m.n_cols(), m.as_slice());
    let mut s: Vec<f64> = nm.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn max_orthogonality_error(m: &DenseMatrix) -> f64 {
    let g = m.transpose().matmul(m);
    let mut worst: f64 = 0.0;
    for i in 0..g.n_rows() {
        for j in 0..g.n_cols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g.get(i, j) - target).abs());
        }
    }
    worst
}

#[test]
fn diagonal_matrix() {
    let m = CsrMatrix::from_dense_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
    let r = truncated_svd(&m, 2, 13).unwrap();
    assert!((r.singular_values[0] - 3.0).abs() < 1e-9);
    assert!((r.singular_values[1] - 2.0).abs() < 1e-9);
}

#[test]
fn rank_one_outer_product() {
    let u = [1.0, 2.0, 2.0];
    let v = [3.0, 4.0];
    let rows: Vec<Vec<f64>> = u.iter().map(|a| v.iter().map(|b| a * b).collect()).collect();
    let m = CsrMatrix::from_dense_rows(&rows).unwrap();
    let r = truncated_svd(&m, 1, 1).unwrap();
    assert!((r.singular_values[0] - 15.0).abs() < 1e-9);
    // k = 2 on a rank-1 matrix: second value is zero and factors stay orthonormal
    let r = truncated_svd(&m, 2, 1).unwrap();
    assert!(r.singular_values[1].abs() < 1e-9);
    assert!(max_orthogonality_error(&r.u) < 1e-6);
    assert!(max_orthogonality_error(&r.v) < 1e-6);
}

#[test]
fn random_matrix_matches_dense_oracle() {
    let d = random_dense(50, 30, 7);
    let oracle = oracle_singular_values(&d);
    let r = truncated_svd(&d.to_csr(), 5, 13).unwrap();
    for (got, want) in r.singular_values.iter().zip(&oracle) {
        assert!((got - want).abs() <= 1e-3 * want, "{got} vs {want}");
    }
    assert!(max_orthogonality_error(&r.u) < 1e-6);
    assert!(max_orthogonality_error(&r.v) < 1e-6);
}

#[test]
fn reconstruction_bounded_by_tail_mass() {
    let d = random_dense(20, 12, 3);
    let oracle = oracle_singular_values(&d);
    let k = 4;
    let r = truncated_svd(&d.to_csr(), k, 5).unwrap();
    let mut recon = DenseMatrix::zeros(20, 12);
    for i in 0..20 {
        for j in 0..12 {
            let v: f64 = (0..k).map(|c| r.u.get(i, c) * r.singular_values[c] * r.v.get(j, c)).sum();
            recon.set(i, j, d.get(i, j) - v);
        }
    }
    let tail: f64 = oracle[k..].iter().map(|s| s * s).sum::<f64>().sqrt();
    let total = d.frobenius_norm();
    assert!(recon.frobenius_norm() <= total * (tail / total + 1e-6));
}

#[test]
fn rejects_bad_rank() {
    let m = random_dense(4, 3, 1).to_csr();
    assert!(truncated_svd(&m, 0, 1).is_err());
    assert!(truncated_svd(&m, 4, 1).is_err());
}

#[test]
fn deterministic_given_seed() {
    let m = random_dense(15, 10, 9).to_csr();
    assert_eq!(truncated_svd(&m, 3, 2).unwrap(), truncated_svd(&m, 3, 2).unwrap());
}

#[test]
fn jacobi_reconstructs() {
    let a = random_dense(8, 5, 11);
    let (w, s, v) = jacobi_svd(&a);
    for i in 0..8 {
        for j in 0..5 {
            let x: f64 = (0..5).map(|c| w.get(i, c) * s[c] * v.get(j, c)).sum();
            assert!((x - a.get(i, j)).abs() < 1e-12);
        }
    }
}

#[test]
fn orthonormalization_handles_zero_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let y = DenseMatrix::zeros(6, 3);
    let q = orthonormal_columns(&y, &mut rng);
    assert!(max_orthogonality_error(&q) < 1e-12);
}

#[test]
fn pca_one_dimensional_points() {
    let m = CsrMatrix::from_dense_rows(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![4.0, 0.0]]).unwrap();
    let p = pca_explained(&m, 5, 13).unwrap();
    assert_eq!(p.explained_variance.len(), 2);
    assert!((p.explained_variance[0] - 4.0).abs() < 1e-9);
    assert!(p.explained_variance[1].abs() < 1e-9);
    assert!((p.total_variance - 4.0).abs() < 1e-12);
}

#[test]
fn pca_constant_column() {
    let m = CsrMatrix::from_dense_rows(&[vec![5.0], vec![5.0], vec![5.0], vec![5.0]]).unwrap();
    let p = pca_explained(&m, 3, 13).unwrap();
    assert_eq!(p.total_variance, 0.0);
    assert!(p.explained_variance.iter().all(|&l| l.abs() < 1e-12));
}

#[test]
fn pca_isotropic_points() {
    // square corners plus centre: symmetric, equal variance in both axes
    let pts = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0], [0.0, 0.0]];
    let rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0] + 3.0, p[1] + 3.0]).collect();
    let m = CsrMatrix::from_dense_rows(&rows).unwrap();
    let p = pca_explained(&m, 2, 13).unwrap();
    // dense covariance oracle: diag(1, 1)
    let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    let eig: nalgebra::DVector<f64> = cov.symmetric_eigen().eigenvalues;
    for (got, want) in p.explained_variance.iter().zip(eig.iter()) {
        assert!((got - want).abs() < 1e-9);
    }
}

#[test]
fn pca_variance_sum_matches_total() {
    let d = random_dense(12, 7, 21);
    let p = pca_explained(&d.to_csr(), 100, 13).unwrap();
    let s: f64 = p.explained_variance.iter().sum();
    assert!((s - p.total_variance).abs() <= 1e-6 * p.total_variance);
}

#[test]
fn pca_needs_two_rows() {
    let m = CsrMatrix::from_dense_rows(&[vec![1.0, 2.0]]).unwrap();
    assert!(pca_explained(&m, 1, 1).is_err());
}
