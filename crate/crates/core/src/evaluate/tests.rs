use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::represent::{default_registry, RepresentationRegistry};

fn registry(n: usize) -> RepresentationRegistry {
    RepresentationRegistry::from_kinds(default_registry().specs()[..n].iter().map(|s| s.kind.clone()).collect())
        .unwrap()
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("k{i}")).collect()
}

fn random_kb(n_rows: usize, n_reps: usize, seed: u64) -> KnowledgeBase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let meta = (0..n_rows).map(|_| (0..N_META_FEATURES).map(|_| rng.random::<f64>()).collect()).collect();
    let acc = (0..n_rows).map(|_| (0..n_reps).map(|_| (rng.random::<f64>() * 10.0).round() / 10.0).collect()).collect();
    KnowledgeBase::from_matrices(&registry(n_reps), names(n_rows), meta, acc).unwrap()
}

/// Best representation is 0 for two categories and 1 otherwise; every
/// other feature is noise.
fn category_driven_kb(n_rows: usize, seed: u64) -> KnowledgeBase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_cat = MetaFeatureVector::names().iter().position(|n| n == "n_categories").unwrap();
    let mut meta = Vec::new();
    let mut acc = Vec::new();
    for i in 0..n_rows {
        let mut m: Vec<f64> = (0..N_META_FEATURES).map(|_| rng.random::<f64>()).collect();
        let cats = 2 + i % 4;
        m[n_cat] = cats as f64;
        meta.push(m);
        acc.push(if cats == 2 { vec![0.9, 0.6, 0.3] } else { vec![0.6, 0.9, 0.3] });
    }
    KnowledgeBase::from_matrices(&registry(3), names(n_rows), meta, acc).unwrap()
}

fn quick(strategies: Vec<Strategy>) -> LooConfig {
    LooConfig {
        strategies,
        n_runs: 2,
        forest: ForestConfig { n_trees: 20, ..ForestConfig::default() },
        ..LooConfig::default()
    }
}

#[test]
fn baselines_follow_their_definitions() {
    let kb = random_kb(6, 5, 1);
    let best = oracle_baseline(&kb);
    assert_eq!(best.avg_rank, 1.0);
    assert_eq!(best.n_rank1_hits, 6.0);
    let random = random_baseline(&kb);
    let all_acc: f64 = kb.accuracy.iter().flatten().sum::<f64>() / 30.0;
    let all_rank: f64 = kb.rank.iter().flatten().sum::<f64>() / 30.0;
    assert!((random.avg_accuracy - all_acc).abs() < 1e-12);
    assert!((random.avg_rank - all_rank).abs() < 1e-12);
    for id in 0..5 {
        let f = fixed_baseline(&kb, id).unwrap();
        let col = kb.accuracy.iter().map(|r| r[id]).sum::<f64>() / 6.0;
        assert!((f.avg_accuracy - col).abs() < 1e-12);
        assert_eq!(f.per_corpus_rank.len(), 6);
    }
    assert!(fixed_baseline(&kb, 5).is_err());
}

#[test]
fn fixed_best_everywhere_matches_oracle() {
    let acc = vec![vec![0.5, 0.9, 0.1], vec![0.2, 0.8, 0.7], vec![0.3, 0.4, 0.3]];
    let meta = (0..3).map(|i| vec![i as f64; N_META_FEATURES]).collect();
    let kb = KnowledgeBase::from_matrices(&registry(3), names(3), meta, acc).unwrap();
    let f = fixed_baseline(&kb, 1).unwrap();
    let b = oracle_baseline(&kb);
    assert_eq!((f.avg_accuracy, f.avg_rank, f.n_rank1_hits), (b.avg_accuracy, b.avg_rank, b.n_rank1_hits));
}

#[test]
fn loo_report_invariants() {
    let kb = random_kb(8, 6, 2);
    let report = loo_evaluate(&kb, &quick(Strategy::ALL.to_vec())).unwrap();
    assert_eq!(report.leak_violations, 0);
    assert_eq!(report.strategies.len(), 4);
    for s in &report.strategies {
        assert_eq!(s.runs.len(), 2);
        for run in &s.runs {
            assert!(run.avg_rank >= 1.0);
            assert!(run.avg_accuracy <= report.best.avg_accuracy);
            assert_eq!(run.n_rank1_hits, run.details.iter().filter(|d| d.rank == 1.0).count());
            for (d, row) in run.details.iter().zip(0..) {
                assert_eq!(d.accuracy, kb.accuracy[row][d.recommended]);
            }
        }
    }
    assert_eq!(report.strategy(Strategy::Nearest).unwrap().avg_rank.std, 0.0);
    let again = loo_evaluate(&kb, &quick(Strategy::ALL.to_vec())).unwrap();
    assert_eq!(report, again);
    let table = report.render_table();
    for label in ["Best", "(1)", "(2)", "(3)", "(4)", "Random", "Avg Accu", "Avg Rank", "# of 1s"] {
        assert!(table.contains(label), "{label} missing from\n{table}");
    }
    let csv = String::from_utf8(report.details_csv().unwrap()).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 2 * 8);
}

#[test]
fn duplicate_rows_give_perfect_nearest() {
    let row: Vec<f64> = (0..N_META_FEATURES).map(|j| j as f64).collect();
    let kb =
        KnowledgeBase::from_matrices(&registry(4), names(5), vec![row; 5], vec![vec![0.2, 0.5, 0.9, 0.1]; 5]).unwrap();
    let r = loo_evaluate(&kb, &quick(vec![Strategy::Nearest])).unwrap();
    assert_eq!(r.strategies[0].avg_rank.mean, 1.0);
}

#[test]
fn loo_needs_three_rows() {
    let kb = random_kb(2, 3, 3);
    assert!(loo_evaluate(&kb, &LooConfig::default()).is_err());
}

#[test]
fn gini_selects_the_deciding_feature() {
    let kb = category_driven_kb(24, 4);
    let seeds = run_seeds(13, 5);
    let cfg = ForestConfig { n_trees: 50, ..ForestConfig::default() };
    let all = gini_select(&kb, 72, &cfg, &seeds).unwrap();
    assert_eq!(all.len(), 72);
    assert!((all.iter().map(|(_, v)| v).sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(all.windows(2).all(|w| w[0].1 >= w[1].1));
    assert_eq!(all[0].0, "n_categories");
    let top = gini_select(&kb, 10, &cfg, &seeds).unwrap();
    assert_eq!(top.len(), 10);
    assert!(gini_select(&kb, 0, &cfg, &seeds).is_err());
    assert!(gini_select(&kb, 73, &cfg, &seeds).is_err());
}

#[test]
fn paired_t_matches_hand_computation() {
    let a = [0.8, 0.75, 0.9, 0.6, 0.7];
    let b = [0.7, 0.7, 0.85, 0.65, 0.6];
    // d = [0.1, 0.05, 0.05, -0.05, 0.1]: mean 0.05, sample variance 0.015 / 4
    let t_hand = 0.05 / (0.015_f64 / 4.0 / 5.0).sqrt();
    let r = paired_t_test(&a, &b).unwrap();
    assert!((r.t - t_hand).abs() < 1e-9);
    assert!((r.t - 1.8257418583505538).abs() < 1e-9);
    assert_eq!(r.df, 4.0);
    // two-sided p for t = 1.8257 with 4 degrees of freedom
    assert!((r.p_value - 0.14192744777405542).abs() < 1e-9);
    let same = paired_t_test(&a, &a).unwrap();
    assert_eq!((same.t, same.p_value), (0.0, 1.0));
    assert!(paired_t_test(&a, &b[..4]).is_err());
}

#[test]
fn subset_against_itself_has_p_one() {
    let kb = random_kb(6, 4, 5);
    let sub = traditional_subset();
    let c = compare_subsets(&kb, &sub, &sub, Strategy::Classify, &quick(vec![])).unwrap();
    assert_eq!(c.test.p_value, 1.0);
    assert_eq!(c.test.mean_difference, 0.0);
    assert_eq!(c.metrics_a, c.metrics_b);

    let other: Vec<String> = MetaFeatureVector::names()[40..60].to_vec();
    let d = compare_subsets(&kb, &sub, &other, Strategy::Nearest, &quick(vec![])).unwrap();
    assert_eq!(d.subset_b.len(), 20);
    assert!((0.0..=1.0).contains(&d.test.p_value));
}

#[test]
fn traditional_preset_is_valid() {
    let t = traditional_subset();
    assert_eq!(t.len(), 19);
    assert_eq!(subset_indices(&t).unwrap().len(), 19);
    assert!(subset_indices(&["nope".to_string()]).is_err());
    assert!(subset_indices(&[]).is_err());
}

#[test]
fn subset_files_are_parsed() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.txt");
    std::fs::write(&p, "# chosen\nn_documents\n\npcac\n").unwrap();
    assert_eq!(load_subset(&p).unwrap(), vec!["n_documents", "pcac"]);
    std::fs::write(&p, "n_documents\nbogus\n").unwrap();
    assert!(load_subset(&p).is_err());
}
