//! Leave-one-out evaluation of recommendation strategies.
//!
//! Each knowledge-base corpus is held out in turn, the strategy is refitted
//! on the remaining rows, and its recommendation is scored by looking up the
//! held-out row's stored accuracy and rank. Also here: oracle, random and
//! fixed-representation baselines, Gini-importance feature ranking, and the
//! paired t-test used to compare meta-feature subsets.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::io::to_csv;
use crate::knowledgebase::KnowledgeBase;
use crate::learners::{ForestConfig, RandomForest};
use crate::metafeatures::{MetaFeatureVector, N_META_FEATURES};
use crate::numerics::DenseMatrix;
use crate::recommend::{recommend, FitAudit, KbView, Standardizer, Strategy};
use crate::seed::{child_seed, DEFAULT_SEED};

pub const DEFAULT_RUNS: usize = 5;

/// Seeds of `n_runs` repetitions derived from one base seed.
pub fn run_seeds(seed: u64, n_runs: usize) -> Vec<u64> {
    (0..n_runs as u64).map(|r| child_seed(seed, r)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LooConfig {
    pub strategies: Vec<Strategy>,
    pub n_runs: usize,
    pub seed: u64,
    /// Forest settings for strategies 2 to 4; the seed is replaced per run.
    pub forest: ForestConfig,
    /// Canonical meta-feature indices to use; `None` uses all 72.
    pub features: Option<Vec<usize>>,
    /// Representation ids reported as fixed baselines.
    pub fixed: Vec<usize>,
}

impl Default for LooConfig {
    fn default() -> Self {
        LooConfig {
            strategies: Strategy::ALL.to_vec(),
            n_runs: DEFAULT_RUNS,
            seed: DEFAULT_SEED,
            forest: ForestConfig::default(),
            features: None,
            fixed: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Mean and sample standard deviation; the deviation of a single value is 0.
    pub fn of(values: &[f64]) -> MeanStd {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        MeanStd { mean, std }
    }

    fn exact(v: f64) -> MeanStd {
        MeanStd { mean: v, std: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailRow {
    pub corpus: String,
    pub recommended: usize,
    pub accuracy: f64,
    pub rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub avg_accuracy: f64,
    pub avg_rank: f64,
    pub n_rank1_hits: usize,
    pub details: Vec<DetailRow>,
}

impl RunResult {
    fn from_details(seed: u64, details: Vec<DetailRow>) -> RunResult {
        let n = details.len() as f64;
        RunResult {
            seed,
            avg_accuracy: details.iter().map(|d| d.accuracy).sum::<f64>() / n,
            avg_rank: details.iter().map(|d| d.rank).sum::<f64>() / n,
            n_rank1_hits: details.iter().filter(|d| d.rank == 1.0).count(),
            details,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub strategy: Strategy,
    pub avg_accuracy: MeanStd,
    pub avg_rank: MeanStd,
    pub n_rank1_hits: MeanStd,
    pub runs: Vec<RunResult>,
}

impl StrategyReport {
    fn from_runs(strategy: Strategy, runs: Vec<RunResult>) -> StrategyReport {
        let pick = |f: &dyn Fn(&RunResult) -> f64| MeanStd::of(&runs.iter().map(f).collect::<Vec<_>>());
        StrategyReport {
            strategy,
            avg_accuracy: pick(&|r| r.avg_accuracy),
            avg_rank: pick(&|r| r.avg_rank),
            n_rank1_hits: pick(&|r| r.n_rank1_hits as f64),
            runs,
        }
    }

    /// Per-corpus accuracy averaged over runs.
    pub fn per_corpus_accuracy(&self) -> Vec<f64> {
        let n = self.runs[0].details.len();
        (0..n).map(|i| self.runs.iter().map(|r| r.details[i].accuracy).sum::<f64>() / self.runs.len() as f64).collect()
    }
}

/// A recommender that needs no learning: oracle, random or fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub name: String,
    pub avg_accuracy: f64,
    pub avg_rank: f64,
    pub n_rank1_hits: f64,
    pub per_corpus_accuracy: Vec<f64>,
    pub per_corpus_rank: Vec<f64>,
}

impl BaselineReport {
    fn new(name: String, acc: Vec<f64>, rank: Vec<f64>, hits: f64) -> Self {
        let n = acc.len() as f64;
        BaselineReport {
            name,
            avg_accuracy: acc.iter().sum::<f64>() / n,
            avg_rank: rank.iter().sum::<f64>() / n,
            n_rank1_hits: hits,
            per_corpus_accuracy: acc,
            per_corpus_rank: rank,
        }
    }
}

/// Per-corpus maximum accuracy; rank 1 everywhere.
pub fn oracle_baseline(kb: &KnowledgeBase) -> BaselineReport {
    let acc = kb.accuracy.iter().map(|r| r.iter().cloned().fold(0.0, f64::max)).collect();
    let n = kb.n_corpora();
    BaselineReport::new("best".into(), acc, vec![1.0; n], n as f64)
}

/// Expected metrics of a uniformly random choice: per-corpus row means, and
/// the expected number of rank-1 hits.
pub fn random_baseline(kb: &KnowledgeBase) -> BaselineReport {
    let r = kb.n_representations() as f64;
    let mean = |row: &Vec<f64>| row.iter().sum::<f64>() / r;
    let hits = kb.rank.iter().map(|row| row.iter().filter(|&&x| x == 1.0).count() as f64 / r).sum();
    BaselineReport::new(
        "random".into(),
        kb.accuracy.iter().map(mean).collect(),
        kb.rank.iter().map(mean).collect(),
        hits,
    )
}

/// Always recommending representation `id`.
pub fn fixed_baseline(kb: &KnowledgeBase, id: usize) -> Result<BaselineReport> {
    let spec =
        kb.spec(id).ok_or_else(|| Error::validation(format!("representation id {id} is not in the knowledge base")))?;
    let acc: Vec<f64> = kb.accuracy.iter().map(|r| r[id]).collect();
    let rank: Vec<f64> = kb.rank.iter().map(|r| r[id]).collect();
    let hits = rank.iter().filter(|&&x| x == 1.0).count() as f64;
    Ok(BaselineReport::new(format!("r{id} {}", spec.describe()), acc, rank, hits))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooReport {
    pub n_corpora: usize,
    pub n_representations: usize,
    pub n_runs: usize,
    pub seeds: Vec<u64>,
    pub corpora: Vec<String>,
    pub features: Vec<String>,
    pub strategies: Vec<StrategyReport>,
    pub best: BaselineReport,
    pub random: BaselineReport,
    pub fixed: Vec<BaselineReport>,
    /// Held-out rows observed among fitting inputs. Always 0 unless a
    /// strategy leaks.
    pub leak_violations: usize,
}

impl LooReport {
    pub fn strategy(&self, s: Strategy) -> Option<&StrategyReport> {
        self.strategies.iter().find(|r| r.strategy == s)
    }

    /// Text table: one column per method, rows for average accuracy,
    /// average rank and number of rank-1 hits.
    pub fn render_table(&self) -> String {
        let mut cols: Vec<(String, MeanStd, MeanStd, MeanStd)> = Vec::new();
        let base = |b: &BaselineReport| {
            (MeanStd::exact(b.avg_accuracy), MeanStd::exact(b.avg_rank), MeanStd::exact(b.n_rank1_hits))
        };
        let (a, r, h) = base(&self.best);
        cols.push(("Best".into(), a, r, h));
        for s in &self.strategies {
            let label = format!("({})", Strategy::ALL.iter().position(|&x| x == s.strategy).unwrap() + 1);
            cols.push((label, s.avg_accuracy, s.avg_rank, s.n_rank1_hits));
        }
        let (a, r, h) = base(&self.random);
        cols.push(("Random".into(), a, r, h));
        for f in &self.fixed {
            let (a, r, h) = base(f);
            cols.push((f.name.split(' ').next().unwrap_or("fixed").to_owned(), a, r, h));
        }
        let cell = |m: MeanStd, prec: usize| format!("{:.p$}±{:.p$}", m.mean, m.std, p = prec);
        let rows: [(&str, Vec<String>); 3] = [
            ("Avg Accu", cols.iter().map(|c| cell(c.1, 4)).collect()),
            ("Avg Rank", cols.iter().map(|c| cell(c.2, 2)).collect()),
            ("# of 1s", cols.iter().map(|c| cell(c.3, 2)).collect()),
        ];
        let width = rows
            .iter()
            .flat_map(|(_, v)| v.iter().map(|s| s.chars().count()))
            .chain(cols.iter().map(|c| c.0.len()))
            .max()
            .unwrap_or(8);
        let mut out = String::new();
        let _ = write!(out, "{:<8}", "Method");
        for c in &cols {
            let _ = write!(out, "  {:>width$}", c.0);
        }
        out.push('\n');
        for (name, vals) in &rows {
            let _ = write!(out, "{name:<8}");
            for v in vals {
                let _ = write!(out, "  {v:>width$}");
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "{} corpora, {} representations, {} runs; strategies: (1) nearest, (2) classify, (3) regress-error, (4) regress-rank",
            self.n_corpora, self.n_representations, self.n_runs
        );
        out
    }

    /// Per-corpus detail rows of every strategy and run.
    pub fn details_csv(&self) -> Result<Vec<u8>> {
        let header = ["strategy", "run", "seed", "corpus", "recommended", "accuracy", "rank"];
        let rows = self.strategies.iter().flat_map(|s| {
            s.runs.iter().enumerate().flat_map(move |(k, run)| {
                run.details.iter().map(move |d| {
                    vec![
                        s.strategy.name().to_owned(),
                        k.to_string(),
                        run.seed.to_string(),
                        d.corpus.clone(),
                        d.recommended.to_string(),
                        d.accuracy.to_string(),
                        d.rank.to_string(),
                    ]
                })
            })
        });
        to_csv(&header, rows)
    }
}

/// Leave-one-out evaluation of the configured strategies.
pub fn loo_evaluate(kb: &KnowledgeBase, cfg: &LooConfig) -> Result<LooReport> {
    let n = kb.n_corpora();
    if n < 3 {
        return Err(Error::validation(format!("leave-one-out needs at least 3 knowledge-base rows, got {n}")));
    }
    if cfg.n_runs == 0 {
        return Err(Error::validation("at least one run is required"));
    }
    let mut base = KbView::full(kb);
    if let Some(f) = &cfg.features {
        base = base.with_features(f.clone())?;
    }
    let seeds = run_seeds(cfg.seed, cfg.n_runs);
    let mut leaks = 0usize;
    let mut strategies = Vec::new();
    for &strategy in &cfg.strategies {
        let mut runs = Vec::new();
        for &seed in &seeds {
            let forest = ForestConfig { seed, ..cfg.forest.clone() };
            let rows: Vec<(DetailRow, bool)> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let audit = FitAudit::new();
                    let view = base.clone().without_row(i).with_audit(&audit);
                    let rec = recommend(&view, &kb.meta[i], strategy, &forest)?;
                    let leaked = audit.rows().contains(&i);
                    let id = rec.representation_id;
                    let detail = DetailRow {
                        corpus: kb.corpora[i].clone(),
                        recommended: id,
                        accuracy: kb.accuracy[i][id],
                        rank: kb.rank[i][id],
                    };
                    Ok((detail, leaked))
                })
                .collect::<Result<_>>()?;
            let violations = rows.iter().filter(|r| r.1).count();
            if violations > 0 {
                log::error!("{strategy}: held-out row entered fitting {violations} times");
            }
            leaks += violations;
            runs.push(RunResult::from_details(seed, rows.into_iter().map(|r| r.0).collect()));
        }
        strategies.push(StrategyReport::from_runs(strategy, runs));
    }
    Ok(LooReport {
        n_corpora: n,
        n_representations: kb.n_representations(),
        n_runs: cfg.n_runs,
        seeds,
        corpora: kb.corpora.clone(),
        features: base.features().iter().map(|&f| kb.meta_feature_names[f].clone()).collect(),
        strategies,
        best: oracle_baseline(kb),
        random: random_baseline(kb),
        fixed: cfg.fixed.iter().map(|&id| fixed_baseline(kb, id)).collect::<Result<_>>()?,
        leak_violations: leaks,
    })
}

/// Gini importances of the strategy-2 forest fitted on the whole knowledge
/// base, averaged over `seeds`, indexed by canonical feature.
pub fn gini_importances(kb: &KnowledgeBase, cfg: &ForestConfig, seeds: &[u64]) -> Result<Vec<f64>> {
    if seeds.is_empty() {
        return Err(Error::validation("at least one seed is required"));
    }
    let s = Standardizer::fit(&kb.meta)?;
    if s.kept.is_empty() {
        return Err(Error::validation("every meta-feature is constant across the knowledge base"));
    }
    let x = DenseMatrix::from_rows(&kb.meta.iter().map(|r| s.transform(r)).collect::<Vec<_>>())?;
    let y: Vec<usize> = (0..kb.n_corpora()).map(|i| kb.best_representation(i)).collect();
    if y.iter().all(|&l| l == y[0]) {
        return Err(Error::validation("every corpus has the same best representation; importances are undefined"));
    }
    let mut total = vec![0.0; N_META_FEATURES];
    for &seed in seeds {
        let forest = RandomForest::fit_classifier(&x, &y, &ForestConfig { seed, ..cfg.clone() })?;
        for (&j, imp) in s.kept.iter().zip(forest.gini_importances()) {
            total[j] += imp;
        }
    }
    Ok(total.into_iter().map(|v| v / seeds.len() as f64).collect())
}

/// The `k` most important meta-features with their importances, most
/// important first; ties keep canonical order.
pub fn gini_select(kb: &KnowledgeBase, k: usize, cfg: &ForestConfig, seeds: &[u64]) -> Result<Vec<(String, f64)>> {
    if !(1..=N_META_FEATURES).contains(&k) {
        return Err(Error::validation(format!("k must lie in 1..=72, got {k}")));
    }
    let imp = gini_importances(kb, cfg, seeds)?;
    let mut order: Vec<usize> = (0..N_META_FEATURES).collect();
    order.sort_by(|&a, &b| imp[b].total_cmp(&imp[a]));
    Ok(order.into_iter().take(k).map(|j| (MetaFeatureVector::names()[j].clone(), imp[j])).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub n: usize,
    pub mean_difference: f64,
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

/// Two-sided paired Student's t-test of `a - b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::validation("paired t-test needs two equal-length samples of at least 2"));
    }
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n;
    let sd = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let df = n - 1.0;
    let (t, p_value) = if sd == 0.0 {
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        }
    } else {
        let t = mean / (sd / n.sqrt());
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::validation(e.to_string()))?;
        (t, (2.0 * dist.sf(t.abs())).min(1.0))
    };
    Ok(TTest { n: a.len(), mean_difference: mean, t, df, p_value })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetComparison {
    pub strategy: Strategy,
    pub subset_a: Vec<String>,
    pub subset_b: Vec<String>,
    pub metrics_a: StrategyReport,
    pub metrics_b: StrategyReport,
    /// Paired test over per-corpus accuracies (averaged over runs), a − b.
    pub test: TTest,
}

/// Canonical indices of `names`, rejecting unknown or duplicate names.
pub fn subset_indices(names: &[String]) -> Result<Vec<usize>> {
    if names.is_empty() {
        return Err(Error::validation("meta-feature subset is empty"));
    }
    let all = MetaFeatureVector::names();
    let mut idx = Vec::with_capacity(names.len());
    for n in names {
        let i =
            all.iter().position(|c| c == n).ok_or_else(|| Error::validation(format!("unknown meta-feature '{n}'")))?;
        if idx.contains(&i) {
            return Err(Error::validation(format!("meta-feature '{n}' listed twice")));
        }
        idx.push(i);
    }
    Ok(idx)
}

/// Leave-one-out metrics of `strategy` under two meta-feature subsets and a
/// paired t-test of their per-corpus accuracies.
pub fn compare_subsets(
    kb: &KnowledgeBase,
    subset_a: &[String],
    subset_b: &[String],
    strategy: Strategy,
    cfg: &LooConfig,
) -> Result<SubsetComparison> {
    let (mut ia, mut ib) = (subset_indices(subset_a)?, subset_indices(subset_b)?);
    let run = |features: Vec<usize>| -> Result<StrategyReport> {
        let c = LooConfig { strategies: vec![strategy], features: Some(features), fixed: Vec::new(), ..cfg.clone() };
        let mut r = loo_evaluate(kb, &c)?;
        Ok(r.strategies.remove(0))
    };
    let metrics_a = run(ia.clone())?;
    ia.sort_unstable();
    ib.sort_unstable();
    let (metrics_b, test) = if ia == ib {
        let n = kb.n_corpora();
        let same = TTest { n, mean_difference: 0.0, t: 0.0, df: n as f64 - 1.0, p_value: 1.0 };
        (metrics_a.clone(), same)
    } else {
        let mb = run(subset_indices(subset_b)?)?;
        let t = paired_t_test(&metrics_a.per_corpus_accuracy(), &mb.per_corpus_accuracy())?;
        (mb, t)
    };
    Ok(SubsetComparison {
        strategy,
        subset_a: subset_a.to_vec(),
        subset_b: subset_b.to_vec(),
        metrics_a,
        metrics_b,
        test,
    })
}

/// Label of the [`traditional_subset`] preset.
pub const TRADITIONAL_SUBSET_LABEL: &str = "traditional-19 (reconstruction)";

/// A 19-feature "traditional" subset: corpus size and category count,
/// vocabulary length, vocabulary/document ratio, mean word length, and the
/// documents-per-category and words-per-document statistics without their
/// entropies.
pub fn traditional_subset() -> Vec<String> {
    let mut names: Vec<String> =
        ["n_documents", "n_categories", "vl", "vdr", "avg_word_length"].iter().map(|s| s.to_string()).collect();
    for block in ["docs_per_category", "words_per_document"] {
        for stat in ["min", "max", "mean", "std", "skewness", "kurtosis", "mean_std_ratio"] {
            names.push(format!("{block}_{stat}"));
        }
    }
    names
}

/// Reads a subset file: one meta-feature name per line, `#` comments.
pub fn load_subset(path: &Path) -> Result<Vec<String>> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let names: Vec<String> =
        src.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::to_owned).collect();
    subset_indices(&names).map_err(|e| Error::parse(Some(path.to_owned()), None, e.to_string()))?;
    Ok(names)
}

#[cfg(test)]
mod tests;
