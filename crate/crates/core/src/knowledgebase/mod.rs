//! Offline phase: exhaustive evaluation of a registry over many corpora.
//!
//! Every (corpus, representation) cell is scored by stratified k-fold cross
//! validation with a linear SVM. Cells are checkpointed one file each, keyed
//! by the corpus content hash, the representation spec and the evaluation
//! settings, so an interrupted build resumes without recomputing anything.

mod checkpoint;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{stratified_kfold, LabeledCorpus};
use crate::error::{Error, Result};
use crate::io::{to_csv, write_atomic};
use crate::learners::{fit_linear_svm, score, SvmConfig};
use crate::metafeatures::{self, ExtractorSettings, MetaFeatureVector, PosLexicon, N_META_FEATURES};
use crate::represent::{fit, RepresentationRegistry, RepresentationSpec, Resources};
use crate::seed::{child_seed, sha256_hex, DEFAULT_SEED};

pub use checkpoint::CheckpointStore;

/// Version of the knowledge-base file layout.
pub const KB_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_FOLDS: usize = 3;

/// Settings of the per-cell cross validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub folds: usize,
    pub seed: u64,
    pub svm: SvmSettings,
}

/// The serializable part of [`SvmConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmSettings {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        let svm = SvmConfig::default();
        EvalConfig {
            folds: DEFAULT_FOLDS,
            seed: DEFAULT_SEED,
            svm: SvmSettings { c: svm.c, tol: svm.tol, max_iter: svm.max_iter },
        }
    }
}

impl EvalConfig {
    fn svm_config(&self) -> SvmConfig {
        SvmConfig { c: self.svm.c, tol: self.svm.tol, max_iter: self.svm.max_iter, seed: self.seed }
    }

    fn hash(&self, resource_digest: &str) -> String {
        let json = serde_json::to_string(&(self, resource_digest)).expect("config serializes");
        sha256_hex(json.as_bytes())
    }
}

/// Outcome of one (corpus, representation) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub accuracy: f64,
    pub failed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl CellResult {
    fn failure(message: String) -> Self {
        CellResult { accuracy: 0.0, failed: true, message: Some(message) }
    }
}

/// Checks that `corpus` supports `folds`-fold stratified cross validation.
pub fn check_fold_feasibility(corpus: &LabeledCorpus, folds: usize) -> Result<()> {
    corpus.require_categories(2)?;
    stratified_kfold(corpus, folds, 0).map(|_| ())
}

/// Mean k-fold accuracy of a linear SVM over `spec`.
///
/// A representation that cannot be fitted or applied on some fold yields a
/// failed result with accuracy 0; a corpus that cannot be split is an error.
pub fn evaluate_representation(
    corpus: &LabeledCorpus,
    spec: &RepresentationSpec,
    resources: &Resources,
    cfg: &EvalConfig,
) -> Result<CellResult> {
    let corpus = corpus.canonicalized();
    let folds = stratified_kfold(&corpus, cfg.folds, cfg.seed)?;
    let labels = corpus.label_indices();
    let svm = cfg.svm_config();
    let mut total = 0.0;
    for (f, split) in folds.iter().enumerate() {
        let train = corpus.subset(&split.train);
        let test = corpus.subset(&split.test);
        let matrices = fit(spec, &train, resources, child_seed(cfg.seed, f as u64))
            .and_then(|m| Ok((m.transform(&train)?, m.transform(&test)?)));
        let (x_train, x_test) = match matrices {
            Ok(m) => m,
            Err(Error::RepresentationFailure(msg)) => return Ok(CellResult::failure(format!("fold {f}: {msg}"))),
            Err(e) => return Err(e),
        };
        if x_train.n_cols() == 0 {
            return Ok(CellResult::failure(format!("fold {f}: representation has no features")));
        }
        let pick = |idx: &[usize]| idx.iter().map(|&i| labels[i]).collect::<Vec<_>>();
        let (y_train, y_test) = (pick(&split.train), pick(&split.test));
        let model = fit_linear_svm(&x_train.to_csr(), &y_train, &svm)?;
        total += score(&model, &x_test.to_csr(), &y_test)?;
    }
    Ok(CellResult { accuracy: total / folds.len() as f64, failed: false, message: None })
}

/// Competition ranking: 1 + the number of strictly better accuracies.
pub fn rank_row(accuracies: &[f64]) -> Vec<f64> {
    accuracies.iter().map(|a| 1.0 + accuracies.iter().filter(|b| *b > a).count() as f64).collect()
}

/// Settings recorded with a knowledge base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KbMetadata {
    pub eval: EvalConfig,
    pub meta_seed: u64,
    pub extractor: ExtractorSettings,
    pub extractor_signature: String,
    pub pos_lexicon_hash: String,
    pub resource_digest: String,
    /// Per-category cap of each corpus, row-aligned.
    pub category_caps: Vec<Option<usize>>,
}

/// Meta-feature vectors and per-representation performance of many corpora.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeBase {
    pub schema_version: u32,
    pub fingerprint: String,
    pub representations: Vec<RepresentationSpec>,
    pub meta_feature_names: Vec<String>,
    pub corpora: Vec<String>,
    pub corpus_hashes: Vec<String>,
    pub meta: Vec<Vec<f64>>,
    pub accuracy: Vec<Vec<f64>>,
    pub rank: Vec<Vec<f64>>,
    pub failed: Vec<Vec<bool>>,
    pub metadata: KbMetadata,
}

impl KnowledgeBase {
    pub fn n_corpora(&self) -> usize {
        self.corpora.len()
    }

    pub fn n_representations(&self) -> usize {
        self.representations.len()
    }

    /// Assembles a knowledge base from given matrices, deriving ranks. Meant
    /// for synthetic experiments; metadata records default settings.
    pub fn from_matrices(
        registry: &RepresentationRegistry,
        corpora: Vec<String>,
        meta: Vec<Vec<f64>>,
        accuracy: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let settings = ExtractorSettings::current();
        let n = corpora.len();
        let kb = KnowledgeBase {
            schema_version: KB_SCHEMA_VERSION,
            fingerprint: registry.fingerprint().to_owned(),
            representations: registry.specs().to_vec(),
            meta_feature_names: MetaFeatureVector::names().to_vec(),
            corpus_hashes: corpora.iter().map(|c| sha256_hex(c.as_bytes())).collect(),
            corpora,
            meta,
            rank: accuracy.iter().map(|a| rank_row(a)).collect(),
            failed: accuracy.iter().map(|a| vec![false; a.len()]).collect(),
            accuracy,
            metadata: KbMetadata {
                eval: EvalConfig::default(),
                meta_seed: DEFAULT_SEED,
                extractor_signature: settings.signature(),
                extractor: settings,
                pos_lexicon_hash: String::new(),
                resource_digest: String::new(),
                category_caps: vec![None; n],
            },
        };
        kb.validate()?;
        Ok(kb)
    }

    /// Lowest representation id with rank 1 in `row`.
    pub fn best_representation(&self, row: usize) -> usize {
        self.rank[row].iter().position(|&r| r == 1.0).expect("every rank row contains a 1")
    }

    pub fn spec(&self, id: usize) -> Option<&RepresentationSpec> {
        self.representations.get(id)
    }

    /// Checks shapes, value ranges and rank consistency.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::validation(format!("invalid knowledge base: {m}")));
        if self.schema_version != KB_SCHEMA_VERSION {
            return Err(Error::Incompatible {
                expected: format!("schema version {KB_SCHEMA_VERSION}"),
                found: format!("schema version {}", self.schema_version),
            });
        }
        let n = self.corpora.len();
        let r = self.representations.len();
        if n == 0 || r == 0 {
            return bad("no corpora or no representations".into());
        }
        if self.meta_feature_names.as_slice() != MetaFeatureVector::names() {
            return bad("meta-feature names differ from the canonical list".into());
        }
        if self.representations.iter().enumerate().any(|(i, s)| s.id != i) {
            return bad("representation ids are not 0..n".into());
        }
        if [self.corpus_hashes.len(), self.meta.len(), self.accuracy.len(), self.rank.len(), self.failed.len()]
            .iter()
            .any(|&len| len != n)
            || self.metadata.category_caps.len() != n
        {
            return bad("matrices are not row-aligned with the corpus list".into());
        }
        for i in 0..n {
            if self.meta[i].len() != N_META_FEATURES || self.meta[i].iter().any(|v| !v.is_finite()) {
                return bad(format!("meta row {i} is not 72 finite values"));
            }
            if self.accuracy[i].len() != r || self.rank[i].len() != r || self.failed[i].len() != r {
                return bad(format!("row {i} does not cover {r} representations"));
            }
            if self.accuracy[i].iter().any(|a| !(0.0..=1.0).contains(a)) {
                return bad(format!("row {i} has an accuracy outside [0,1]"));
            }
            if self.failed[i].iter().zip(&self.accuracy[i]).any(|(&f, &a)| f && a != 0.0) {
                return bad(format!("row {i} has a failed cell with nonzero accuracy"));
            }
            if rank_row(&self.accuracy[i]) != self.rank[i] {
                return bad(format!("row {i} ranks do not match its accuracies"));
            }
        }
        Ok(())
    }

    /// Fails with [`Error::Incompatible`] unless built from `registry`.
    pub fn check_registry(&self, registry: &RepresentationRegistry) -> Result<()> {
        if self.fingerprint != registry.fingerprint() {
            return Err(Error::Incompatible {
                expected: format!("registry fingerprint {}", registry.fingerprint()),
                found: format!("registry fingerprint {}", self.fingerprint),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self)?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_json()?)
    }

    /// Loads and validates a knowledge base.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let kb: KnowledgeBase = serde_json::from_slice(&bytes)
            .map_err(|e| Error::parse(Some(path.to_owned()), Some(e.line()).filter(|&l| l > 0), e.to_string()))?;
        kb.validate()?;
        Ok(kb)
    }

    /// Loads a knowledge base and checks it against `registry`.
    pub fn load_for(path: &Path, registry: &RepresentationRegistry) -> Result<Self> {
        let kb = Self::load(path)?;
        kb.check_registry(registry)?;
        Ok(kb)
    }

    /// The meta matrix as CSV: `corpus` then the 72 names.
    pub fn meta_csv(&self) -> Result<Vec<u8>> {
        let mut header = vec!["corpus".to_owned()];
        header.extend(self.meta_feature_names.iter().cloned());
        self.matrix_csv(header, |i| self.meta[i].iter().map(f64::to_string).collect())
    }

    /// The accuracy matrix as CSV with one column per representation id.
    pub fn accuracy_csv(&self) -> Result<Vec<u8>> {
        self.matrix_csv(self.representation_header(), |i| self.accuracy[i].iter().map(f64::to_string).collect())
    }

    pub fn rank_csv(&self) -> Result<Vec<u8>> {
        self.matrix_csv(self.representation_header(), |i| self.rank[i].iter().map(f64::to_string).collect())
    }

    fn representation_header(&self) -> Vec<String> {
        let mut header = vec!["corpus".to_owned()];
        header.extend(self.representations.iter().map(|s| format!("r{}", s.id)));
        header
    }

    fn matrix_csv(&self, header: Vec<String>, row: impl Fn(usize) -> Vec<String>) -> Result<Vec<u8>> {
        to_csv(
            &header,
            (0..self.n_corpora()).map(|i| {
                let mut cells = vec![self.corpora[i].clone()];
                cells.extend(row(i));
                cells
            }),
        )
    }
}

/// Options of [`build_knowledge_base`].
#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub eval: EvalConfig,
    /// Seed for meta-feature extraction.
    pub meta_seed: u64,
    /// Worker threads for cell evaluation; `None` uses all cores.
    pub jobs: Option<usize>,
    pub checkpoint_dir: Option<PathBuf>,
    /// Stop after computing this many new cells. Used to exercise resuming.
    pub cell_budget: Option<usize>,
    /// Identifies external resources (word vectors, lexicon) in cell keys.
    pub resource_digest: String,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            eval: EvalConfig::default(),
            meta_seed: DEFAULT_SEED,
            jobs: None,
            checkpoint_dir: None,
            cell_budget: None,
            resource_digest: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BuildOutcome {
    Complete(Box<KnowledgeBase>),
    /// The cell budget ran out; completed cells are checkpointed.
    Partial {
        cells_done: usize,
        cells_total: usize,
    },
}

impl BuildOutcome {
    pub fn complete(self) -> Option<KnowledgeBase> {
        match self {
            BuildOutcome::Complete(kb) => Some(*kb),
            BuildOutcome::Partial { .. } => None,
        }
    }
}

/// Evaluates every registry cell on every corpus and assembles the KB.
///
/// Corpora that cannot be split into the configured folds are skipped with
/// a warning. Cells run on a bounded worker pool; a single writer commits
/// checkpoints as results arrive.
pub fn build_knowledge_base(
    corpora: &[LabeledCorpus],
    registry: &RepresentationRegistry,
    resources: &Resources,
    pos_lexicon: &PosLexicon,
    cfg: &BuildConfig,
) -> Result<BuildOutcome> {
    registry.check_resources(resources)?;
    let kept: Vec<&LabeledCorpus> = corpora
        .iter()
        .filter(|c| match check_fold_feasibility(c, cfg.eval.folds) {
            Ok(()) => true,
            Err(e) => {
                log::warn!("excluding corpus '{}': {e}", c.name());
                false
            }
        })
        .collect();
    if kept.len() < 2 {
        return Err(Error::validation(format!("a knowledge base needs at least 2 usable corpora, got {}", kept.len())));
    }

    let store = CheckpointStore::new(cfg.checkpoint_dir.clone())?;
    let config_hash = cfg.eval.hash(&cfg.resource_digest);
    let corpus_hashes: Vec<String> = kept.iter().map(|c| c.content_hash_hex()).collect();
    let cells: Vec<(usize, usize, String)> = (0..kept.len())
        .flat_map(|i| (0..registry.len()).map(move |r| (i, r)))
        .map(|(i, r)| {
            let spec = serde_json::to_string(&registry.specs()[r].kind).expect("spec serializes");
            (i, r, checkpoint::cell_key(&corpus_hashes[i], &spec, &config_hash))
        })
        .collect();
    let total = cells.len();

    let mut results: BTreeMap<(usize, usize), CellResult> = BTreeMap::new();
    let mut pending = Vec::new();
    for (i, r, key) in cells {
        match store.load_cell(&key)? {
            Some(res) => {
                results.insert((i, r), res);
            }
            None => pending.push((i, r, key)),
        }
    }
    let interrupted = cfg.cell_budget.is_some_and(|b| b < pending.len());
    if let Some(budget) = cfg.cell_budget {
        pending.truncate(budget);
    }
    log::info!("{} of {total} cells checkpointed, evaluating {}", results.len(), pending.len());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::validation(format!("cannot start worker pool: {e}")))?;
    let (tx, rx) = std::sync::mpsc::channel::<(usize, usize, String, Result<CellResult>)>();
    let mut first_error = None;
    std::thread::scope(|s| {
        let pending = &pending;
        let kept = &kept;
        s.spawn(move || {
            use rayon::prelude::*;
            pool.install(|| {
                pending.par_iter().for_each_with(tx, |tx, (i, r, key)| {
                    let res = evaluate_representation(kept[*i], &registry.specs()[*r], resources, &cfg.eval);
                    let _ = tx.send((*i, *r, key.clone(), res));
                });
            });
        });
        for (i, r, key, res) in rx {
            match res.and_then(|cell| store.save_cell(&key, &cell).map(|_| cell)) {
                Ok(cell) => {
                    if let Some(msg) = &cell.message {
                        log::warn!("corpus '{}', representation {r}: {msg}", kept[i].name());
                    }
                    results.insert((i, r), cell);
                }
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
    });
    if let Some(e) = first_error {
        return Err(e);
    }
    if interrupted {
        return Ok(BuildOutcome::Partial { cells_done: results.len(), cells_total: total });
    }

    let settings = ExtractorSettings::current();
    let signature = settings.signature();
    let mut meta = Vec::with_capacity(kept.len());
    for (c, hash) in kept.iter().zip(&corpus_hashes) {
        let key = checkpoint::meta_key(hash, cfg.meta_seed, &signature, pos_lexicon.content_hash());
        let values = match store.load_meta(&key)? {
            Some(v) => v,
            None => {
                let v = metafeatures::extract(c, cfg.meta_seed, pos_lexicon)?.values;
                store.save_meta(&key, &v)?;
                v
            }
        };
        meta.push(values);
    }

    let n_reps = registry.len();
    let results = &results;
    let row = |i: usize| (0..n_reps).map(move |r| &results[&(i, r)]);
    let accuracy: Vec<Vec<f64>> = (0..kept.len()).map(|i| row(i).map(|c| c.accuracy).collect()).collect();
    let failed = (0..kept.len()).map(|i| row(i).map(|c| c.failed).collect()).collect();
    let rank = accuracy.iter().map(|a| rank_row(a)).collect();
    let kb = KnowledgeBase {
        schema_version: KB_SCHEMA_VERSION,
        fingerprint: registry.fingerprint().to_owned(),
        representations: registry.specs().to_vec(),
        meta_feature_names: MetaFeatureVector::names().to_vec(),
        corpora: kept.iter().map(|c| c.name().to_owned()).collect(),
        corpus_hashes,
        meta,
        accuracy,
        rank,
        failed,
        metadata: KbMetadata {
            eval: cfg.eval.clone(),
            meta_seed: cfg.meta_seed,
            extractor: settings,
            extractor_signature: signature,
            pos_lexicon_hash: pos_lexicon.content_hash().to_owned(),
            resource_digest: cfg.resource_digest.clone(),
            category_caps: kept.iter().map(|c| c.per_category_cap()).collect(),
        },
    };
    kb.validate()?;
    Ok(BuildOutcome::Complete(Box::new(kb)))
}
