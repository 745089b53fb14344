use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::*;
use crate::numerics::DenseMatrix;

fn csr(rows: &[Vec<f64>]) -> CsrMatrix {
    CsrMatrix::from_dense_rows(rows).unwrap()
}

/// Two Gaussian blobs centred at (±3, ±3) with unit variance.
fn blobs(n_per: usize, seed: u64) -> (DenseMatrix, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for c in 0..2 {
        let centre = if c == 0 { -3.0 } else { 3.0 };
        for _ in 0..n_per {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            rows.push(vec![centre + a, centre + b]);
            y.push(c);
        }
    }
    (DenseMatrix::from_rows(&rows).unwrap(), y)
}

fn separable_points() -> (CsrMatrix, Vec<usize>) {
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..10 {
        let t = i as f64 * 0.3;
        rows.push(vec![-2.0 - t, 1.0 + 0.1 * t]);
        y.push(0);
        rows.push(vec![2.0 + t, -1.0 + 0.2 * t]);
        y.push(1);
    }
    (csr(&rows), y)
}

#[test]
fn svm_separable_and_deterministic() {
    let (x, y) = separable_points();
    let cfg = SvmConfig::default();
    let m = fit_linear_svm(&x, &y, &cfg).unwrap();
    assert_eq!(score(&m, &x, &y).unwrap(), 1.0);
    let again = fit_linear_svm(&x, &y, &cfg).unwrap();
    assert_eq!(m.weights(), again.weights());
}

#[test]
fn svm_xor_is_not_separable() {
    let x = csr(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]]);
    let y = [0, 0, 1, 1];
    let m = fit_linear_svm(&x, &y, &SvmConfig::default()).unwrap();
    assert!(score(&m, &x, &y).unwrap() <= 0.75);
}

#[test]
fn svm_dual_objective_never_increases() {
    let (d, y) = blobs(40, 2);
    // overlapping three-class problem keeps the solver busy for several epochs
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let y3: Vec<usize> = y.iter().map(|&c| if rng.random_bool(0.3) { 2 } else { c }).collect();
    let m = fit_linear_svm(&d.to_csr(), &y3, &SvmConfig { tol: 1e-6, ..SvmConfig::default() }).unwrap();
    assert_eq!(m.objective_traces().len(), 3);
    for trace in m.objective_traces() {
        assert!(trace.len() >= 2);
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn svm_multiclass_emits_known_labels_only() {
    let x = csr(&[vec![5.0, 0.0], vec![6.0, 0.5], vec![0.0, 5.0], vec![0.5, 6.0], vec![-5.0, -5.0], vec![-6.0, -5.5]]);
    let y = [10, 10, 20, 20, 30, 30];
    let m = fit_linear_svm(&x, &y, &SvmConfig::default()).unwrap();
    assert_eq!(m.predict(&x).unwrap(), y.to_vec());
    assert_eq!(m.classes(), &[10, 20, 30]);
    assert!(m.predict(&csr(&[vec![1.0, 2.0, 3.0]])).is_err());
}

#[test]
fn single_class_is_rejected_everywhere() {
    let x = csr(&[vec![1.0], vec![2.0]]);
    let y = [4, 4];
    assert!(fit_linear_svm(&x, &y, &SvmConfig::default()).is_err());
    for k in LandmarkerKind::ALL {
        assert!(fit_landmarker(k, &x, &y).is_err());
    }
    assert!(RandomForest::fit_classifier(&x.to_dense(), &y, &ForestConfig::default()).is_err());
}

#[test]
fn knn_self_scoring() {
    let x = csr(&[vec![0.0, 1.0], vec![3.0, 1.0], vec![5.0, 5.0], vec![0.0, 0.0]]);
    let y = [0, 1, 1, 0];
    let m = fit_landmarker(LandmarkerKind::Knn1, &x, &y).unwrap();
    assert_eq!(score(m.as_ref(), &x, &y).unwrap(), 1.0);
    // equidistant query picks the lower training index
    let q = csr(&[vec![1.5, 1.0]]);
    assert_eq!(m.predict(&q).unwrap(), vec![0]);
}

#[test]
fn tree_single_split() {
    let xs = [-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 4.0];
    let rows: Vec<Vec<f64>> = xs.iter().map(|&v| vec![v]).collect();
    let y: Vec<usize> = xs.iter().map(|&v| usize::from(v >= 0.0)).collect();
    let m = fit_landmarker(LandmarkerKind::DecisionTree, &csr(&rows), &y).unwrap();
    assert_eq!(score(m.as_ref(), &csr(&rows), &y).unwrap(), 1.0);
    let t = DecisionTree::fit_classifier(&DenseMatrix::from_rows(&rows).unwrap(), &y, &TreeConfig::default()).unwrap();
    assert_eq!(t.nodes().len(), 3);
    match t.nodes()[0] {
        Node::Split { feature, threshold, .. } => {
            assert_eq!(feature, 0);
            assert_eq!(threshold, -0.25);
        }
        _ => panic!("root should split"),
    }
}

#[test]
fn tree_fits_xor_with_zero_gain_root() {
    let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
    let y = [0, 0, 1, 1];
    let d = DenseMatrix::from_rows(&rows).unwrap();
    let t = DecisionTree::fit_classifier(&d, &y, &TreeConfig::default()).unwrap();
    assert_eq!(t.predict_class(&d).unwrap(), y.to_vec());
}

#[test]
fn tree_unlimited_depth_memorizes_distinct_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rows: Vec<Vec<f64>> = (0..60).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
    let y: Vec<usize> = (0..60).map(|_| rng.random_range(0..3)).collect();
    let d = DenseMatrix::from_rows(&rows).unwrap();
    let t = DecisionTree::fit_classifier(&d, &y, &TreeConfig::default()).unwrap();
    assert_eq!(accuracy(&t.predict_class(&d).unwrap(), &y), 1.0);
}

#[test]
fn regression_tree_constant_target_is_exact() {
    let d = DenseMatrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
    let t = DecisionTree::fit_regressor(&d, &[0.1; 3], &TreeConfig::default()).unwrap();
    assert_eq!(t.predict_value(&d).unwrap(), vec![0.1; 3]);
}

#[test]
fn diag_lda_separates_blobs() {
    let (d, y) = blobs(30, 4);
    let m = fit_landmarker(LandmarkerKind::DiagLda, &d.to_csr(), &y).unwrap();
    assert!(score(m.as_ref(), &d.to_csr(), &y).unwrap() >= 0.95);
}

#[test]
fn naive_bayes_hand_example() {
    let x = csr(&[vec![3.0, 0.0], vec![0.0, 3.0]]);
    let y = [0, 1];
    let m = MultinomialNb::fit(&x, &y).unwrap();
    let q = csr(&[vec![2.0, 0.0]]);
    assert_eq!(m.predict(&q).unwrap(), vec![0]);
    // θ_A = (4/5, 1/5), θ_B = (1/5, 4/5); equal priors
    let jll = &m.joint_log_likelihood(&q).unwrap()[0];
    let want_a = 0.5f64.ln() + 2.0 * 0.8f64.ln();
    let want_b = 0.5f64.ln() + 2.0 * 0.2f64.ln();
    assert!((jll[0] - want_a).abs() < 1e-12);
    assert!((jll[1] - want_b).abs() < 1e-12);
    let p = &m.predict_proba(&q).unwrap()[0];
    assert!((p[0] - 0.64 / 0.68).abs() < 1e-12);
}

#[test]
fn naive_bayes_shifts_negative_inputs() {
    let x = csr(&[vec![-1.0, 2.0], vec![2.0, -1.0]]);
    let m = MultinomialNb::fit(&x, &[0, 1]).unwrap();
    // after shifting by +1 the rows are (0,3) and (3,0)
    let shifted = MultinomialNb::fit(&csr(&[vec![0.0, 3.0], vec![3.0, 0.0]]), &[0, 1]).unwrap();
    let q = csr(&[vec![0.0, 1.0]]);
    let q_shifted = csr(&[vec![1.0, 2.0]]);
    let a = m.joint_log_likelihood(&q).unwrap();
    let b = shifted.joint_log_likelihood(&q_shifted).unwrap();
    for (u, v) in a[0].iter().zip(&b[0]) {
        assert!((u - v).abs() < 1e-12);
    }
}

#[test]
fn one_tree_forest_matches_cart() {
    let (d, y) = blobs(25, 6);
    let cfg =
        ForestConfig { n_trees: 1, features_per_split: FeatureRule::All, bootstrap: false, ..ForestConfig::default() };
    let f = RandomForest::fit_classifier(&d, &y, &cfg).unwrap();
    let t = DecisionTree::fit_classifier(&d, &y, &TreeConfig::default()).unwrap();
    assert_eq!(f.trees()[0].nodes(), t.nodes());
    let (q, _) = blobs(20, 99);
    assert_eq!(f.predict_class(&q).unwrap(), t.predict_class(&q).unwrap());
    assert_eq!(f.oob_score(), None);
}

#[test]
fn forest_regression_constant_target() {
    let (d, _) = blobs(10, 1);
    let y = vec![2.5; d.n_rows()];
    let f = RandomForest::fit_regressor(&d, &y, &ForestConfig { n_trees: 10, ..ForestConfig::default() }).unwrap();
    assert!(f.predict_value(&d).unwrap().iter().all(|&p| p == 2.5));
    // no tree could split, so importances fall back to uniform
    assert_eq!(f.gini_importances(), vec![0.5, 0.5]);
}

#[test]
fn forest_oob_accuracy_on_blobs() {
    let (d, y) = blobs(50, 3);
    let f = RandomForest::fit_classifier(&d, &y, &ForestConfig::default()).unwrap();
    assert_eq!(f.n_trees(), 100);
    assert!(f.oob_score().unwrap() >= 0.95, "{:?}", f.oob_score());
}

#[test]
fn forest_seeds_agree_on_blobs() {
    let (d, y) = blobs(50, 3);
    let (q, _) = blobs(50, 77);
    let a = RandomForest::fit_classifier(&d, &y, &ForestConfig { seed: 1, ..ForestConfig::default() }).unwrap();
    let b = RandomForest::fit_classifier(&d, &y, &ForestConfig { seed: 2, ..ForestConfig::default() }).unwrap();
    let pa = a.predict_class(&q).unwrap();
    assert!(accuracy(&pa, &b.predict_class(&q).unwrap()) >= 0.9);
    let again = RandomForest::fit_classifier(&d, &y, &ForestConfig { seed: 1, ..ForestConfig::default() }).unwrap();
    assert_eq!(pa, again.predict_class(&q).unwrap());
}

#[test]
fn gini_importance_finds_the_signal() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for _ in 0..200 {
        let label = rng.random_range(0..2usize);
        let mut row: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
        row[0] = label as f64 * 2.0 + rng.random::<f64>() * 1.5;
        rows.push(row);
        y.push(label);
    }
    let d = DenseMatrix::from_rows(&rows).unwrap();
    let model = TrainedModel::RfClassifier(RandomForest::fit_classifier(&d, &y, &ForestConfig::default()).unwrap());
    let imp = gini_importances(&model).unwrap();
    assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let top = imp.iter().cloned().fold(f64::MIN, f64::max);
    assert_eq!(imp[0], top);
}

#[test]
fn huge_leaf_forest_has_uniform_importances() {
    let (d, y) = blobs(20, 2);
    let cfg = ForestConfig { n_trees: 5, min_samples_leaf: 1000, ..ForestConfig::default() };
    let f = RandomForest::fit_classifier(&d, &y, &cfg).unwrap();
    assert_eq!(f.gini_importances(), vec![0.5, 0.5]);
}

#[test]
fn importances_need_a_forest() {
    let (x, y) = separable_points();
    let m = TrainedModel::LinearSvm(fit_linear_svm(&x, &y, &SvmConfig::default()).unwrap());
    assert!(gini_importances(&m).is_err());
}

#[test]
fn empty_forest_input_is_rejected() {
    let d = DenseMatrix::zeros(0, 3);
    assert!(RandomForest::fit_regressor(&d, &[], &ForestConfig::default()).is_err());
    assert!(RandomForest::fit_classifier(&d, &[], &ForestConfig { n_trees: 0, ..ForestConfig::default() }).is_err());
}
