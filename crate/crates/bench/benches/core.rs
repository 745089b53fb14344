use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use textrep_core::knowledgebase::{evaluate_representation, EvalConfig};
use textrep_core::learners::{ForestConfig, RandomForest};
use textrep_core::metafeatures::extract;
use textrep_core::numerics::{truncated_svd, CsrMatrix, DenseMatrix};
use textrep_core::represent::{default_registry, Resources};
use textrep_core::synth::{generate, SynthSpec};
use textrep_core::PosLexicon;

fn sparse(n: usize, d: usize, density: f64, seed: u64) -> CsrMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> =
        (0..n).map(|_| (0..d).map(|_| if rng.random_bool(density) { rng.random() } else { 0.0 }).collect()).collect();
    CsrMatrix::from_dense_rows(&rows).unwrap()
}

fn svd(c: &mut Criterion) {
    let mut group = c.benchmark_group("truncated_svd");
    for &(n, d) in &[(200, 500), (600, 2000)] {
        let m = sparse(n, d, 0.02, 1);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{d}")), &m, |b, m| {
            b.iter(|| truncated_svd(black_box(m), 50, 13).unwrap())
        });
    }
    group.finish();
}

fn extraction(c: &mut Criterion) {
    let lex = PosLexicon::bundled();
    let mut group = c.benchmark_group("extract");
    group.sample_size(10);
    for &per_class in &[30, 120] {
        let corpus = generate(&SynthSpec { docs_per_category: vec![per_class; 3], ..SynthSpec::default() });
        group.bench_with_input(BenchmarkId::from_parameter(corpus.len()), &corpus, |b, corpus| {
            b.iter(|| extract(black_box(corpus), 13, &lex).unwrap())
        });
    }
    group.finish();
}

fn forest(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rows: Vec<Vec<f64>> = (0..80).map(|_| (0..72).map(|_| rng.random()).collect()).collect();
    let y: Vec<usize> = (0..80).map(|i| i % 5).collect();
    let x = DenseMatrix::from_rows(&rows).unwrap();
    c.bench_function("forest_classifier_80x72", |b| {
        b.iter(|| RandomForest::fit_classifier(black_box(&x), &y, &ForestConfig::default()).unwrap())
    });
}

fn cell(c: &mut Criterion) {
    let corpus = generate(&SynthSpec::default()).canonicalized();
    let spec = default_registry().specs()[2].clone();
    let cfg = EvalConfig::default();
    c.bench_function("cell_word_unigram_tfidf", |b| {
        b.iter(|| evaluate_representation(black_box(&corpus), &spec, &Resources::default(), &cfg).unwrap())
    });
}

criterion_group!(benches, svd, extraction, forest, cell);
criterion_main!(benches);
