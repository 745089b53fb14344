//! The representation registry (the meta-learner's action space) and the
//! vectorizers that turn a corpus into a feature matrix.
//!
//! Every representation is fitted on a training corpus only and then applied
//! to any corpus; [`fit`] and [`FittedRepresentation::transform`] keep the
//! two phases apart, and [`vectorize`] chains them.

mod embedding;
mod lexicon;
mod ngram;
mod topic;

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize_words, LabeledCorpus};
use crate::data;
use crate::error::{Error, Result};
use crate::numerics::{truncated_svd, CsrMatrix, DenseMatrix};
use crate::seed::sha256_hex;

pub use embedding::{
    aggregate_embeddings, load_word_vectors, save_word_vectors, train_embeddings, SkipGramConfig, WordVectors,
};
pub use lexicon::{lexicon_features, load_lexicon, save_lexicon, CategoryLexicon};
pub use ngram::NgramModel;
pub use topic::{LdaConfig, TopicModel};

/// Maximum vocabulary per fitted representation.
pub const VOCAB_CAP: usize = 50_000;
/// Default LDA topic count.
pub const DEFAULT_TOPICS: usize = 50;
/// Default Gibbs sweeps when training LDA.
pub const DEFAULT_LDA_ITERATIONS: usize = 100;
/// Upper bound on LSA dimensions when none is configured.
pub const DEFAULT_LSA_DIMS: usize = 300;
/// Default embedding dimension.
pub const DEFAULT_EMBEDDING_DIM: usize = 100;
/// Default skip-gram epochs.
pub const DEFAULT_EMBEDDING_EPOCHS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analyzer {
    Word,
    Char,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stopwords {
    None,
    English,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Binary,
    Tf,
    Tfidf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Mean,
    Sum,
}

fn default_topics() -> usize {
    DEFAULT_TOPICS
}
fn default_lda_iterations() -> usize {
    DEFAULT_LDA_ITERATIONS
}
fn default_dim() -> usize {
    DEFAULT_EMBEDDING_DIM
}
fn default_epochs() -> usize {
    DEFAULT_EMBEDDING_EPOCHS
}

/// Feature family plus its hyper-parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "lowercase")]
pub enum RepresentationKind {
    Ngram {
        analyzer: Analyzer,
        stopwords: Stopwords,
        /// Inclusive n-gram range, `1 <= lo <= hi <= 3`.
        range: (usize, usize),
        weight: Weighting,
    },
    Lda {
        stopwords: Stopwords,
        #[serde(default = "default_topics")]
        topics: usize,
        #[serde(default = "default_lda_iterations")]
        iterations: usize,
    },
    Lsa {
        stopwords: Stopwords,
        weight: Weighting,
        /// Fixed number of components; `None` means `min(300, rank)`.
        #[serde(default)]
        dims: Option<usize>,
    },
    Lexicon,
    Embedding {
        pretrained: bool,
        aggregation: Aggregation,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_epochs")]
        epochs: usize,
    },
}

impl RepresentationKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RepresentationKind::Ngram { range: (lo, hi), .. } => {
                if !(1 <= lo && lo <= hi && hi <= 3) {
                    return Err(Error::validation(format!("n-gram range ({lo},{hi}) outside 1 <= lo <= hi <= 3")));
                }
            }
            RepresentationKind::Lda { topics, iterations, .. } => {
                if topics < 2 {
                    return Err(Error::validation("LDA needs at least 2 topics"));
                }
                if iterations == 0 {
                    return Err(Error::validation("LDA needs at least one iteration"));
                }
            }
            RepresentationKind::Lsa { weight, dims, .. } => {
                if weight == Weighting::Binary {
                    return Err(Error::validation("LSA weighting must be tf or tfidf"));
                }
                if dims == Some(0) {
                    return Err(Error::validation("LSA dims must be positive"));
                }
            }
            RepresentationKind::Lexicon => {}
            RepresentationKind::Embedding { dim, epochs, .. } => {
                if dim == 0 || epochs == 0 {
                    return Err(Error::validation("embedding dim and epochs must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn family(&self) -> &'static str {
        match self {
            RepresentationKind::Ngram { .. } => "ngram",
            RepresentationKind::Lda { .. } => "lda",
            RepresentationKind::Lsa { .. } => "lsa",
            RepresentationKind::Lexicon => "lexicon",
            RepresentationKind::Embedding { .. } => "embedding",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RepresentationSpec {
    pub id: usize,
    #[serde(flatten)]
    pub kind: RepresentationKind,
}

impl RepresentationSpec {
    /// Short human-readable description, e.g. `ngram(word, stop=none, 1-2, tfidf)`.
    pub fn describe(&self) -> String {
        let sw = |s: &Stopwords| match s {
            Stopwords::None => "none",
            Stopwords::English => "english",
        };
        match &self.kind {
            RepresentationKind::Ngram { analyzer, stopwords, range, weight } => format!(
                "ngram({}, stop={}, {}-{}, {})",
                lower(analyzer),
                sw(stopwords),
                range.0,
                range.1,
                lower(weight)
            ),
            RepresentationKind::Lda { stopwords, topics, .. } => {
                format!("lda(stop={}, topics={topics})", sw(stopwords))
            }
            RepresentationKind::Lsa { stopwords, weight, .. } => {
                format!("lsa(stop={}, {})", sw(stopwords), lower(weight))
            }
            RepresentationKind::Lexicon => "lexicon".to_owned(),
            RepresentationKind::Embedding { pretrained, aggregation, .. } => {
                format!("embedding({}, {})", if *pretrained { "pretrained" } else { "trained" }, lower(aggregation))
            }
        }
    }
}

fn lower<T: std::fmt::Debug>(v: &T) -> String {
    format!("{v:?}").to_lowercase()
}

/// Ordered list of representations with a content fingerprint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentationRegistry {
    specs: Vec<RepresentationSpec>,
    fingerprint: String,
}

impl RepresentationRegistry {
    /// Builds a registry, numbering specs by position.
    pub fn from_kinds(kinds: Vec<RepresentationKind>) -> Result<Self> {
        if kinds.is_empty() {
            return Err(Error::validation("registry is empty"));
        }
        for k in &kinds {
            k.validate()?;
        }
        let specs: Vec<RepresentationSpec> =
            kinds.into_iter().enumerate().map(|(id, kind)| RepresentationSpec { id, kind }).collect();
        let fingerprint = fingerprint(&specs);
        Ok(RepresentationRegistry { specs, fingerprint })
    }

    pub fn specs(&self) -> &[RepresentationSpec] {
        &self.specs
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&RepresentationSpec> {
        self.specs.get(id)
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// A registry without the specs matching `drop`, renumbered.
    pub fn without(&self, drop: impl Fn(&RepresentationKind) -> bool) -> Result<Self> {
        Self::from_kinds(self.specs.iter().filter(|s| !drop(&s.kind)).map(|s| s.kind.clone()).collect())
    }

    pub fn needs_lexicon(&self) -> bool {
        self.specs.iter().any(|s| matches!(s.kind, RepresentationKind::Lexicon))
    }

    pub fn needs_word_vectors(&self) -> bool {
        self.specs.iter().any(|s| matches!(s.kind, RepresentationKind::Embedding { pretrained: true, .. }))
    }

    /// Checks that `resources` cover every spec.
    pub fn check_resources(&self, resources: &Resources) -> Result<()> {
        if self.needs_lexicon() && resources.lexicon.is_none() {
            return Err(Error::validation("registry contains a lexicon representation but no lexicon was supplied"));
        }
        if self.needs_word_vectors() && resources.word_vectors.is_none() {
            return Err(Error::validation(
                "registry contains a pretrained embedding representation but no word vectors were supplied",
            ));
        }
        Ok(())
    }

    /// Reads a registry from a JSON array of representation objects.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let kinds: Vec<RepresentationKind> = serde_json::from_str(&text)
            .map_err(|e| Error::parse(Some(path.to_owned()), Some(e.line()), e.to_string()))?;
        Self::from_kinds(kinds)
    }
}

fn fingerprint(specs: &[RepresentationSpec]) -> String {
    let payload = serde_json::json!({
        "registry_format": 1,
        "specs": specs,
        "stopwords": data::stopwords_hash(),
        "vocab_cap": VOCAB_CAP,
    });
    sha256_hex(payload.to_string().as_bytes())
}

/// The literal cross-product of the standard representation grid: 36 n-gram,
/// 2 LDA, 4 LSA, 1 lexicon and 4 embedding configurations, in that order.
pub fn default_registry() -> RepresentationRegistry {
    let mut kinds = Vec::with_capacity(47);
    let stops = [Stopwords::None, Stopwords::English];
    for analyzer in [Analyzer::Word, Analyzer::Char] {
        for stopwords in stops {
            for range in [(1, 1), (1, 2), (1, 3)] {
                for weight in [Weighting::Binary, Weighting::Tf, Weighting::Tfidf] {
                    kinds.push(RepresentationKind::Ngram { analyzer, stopwords, range, weight });
                }
            }
        }
    }
    for stopwords in stops {
        kinds.push(RepresentationKind::Lda { stopwords, topics: DEFAULT_TOPICS, iterations: DEFAULT_LDA_ITERATIONS });
    }
    for stopwords in stops {
        for weight in [Weighting::Tf, Weighting::Tfidf] {
            kinds.push(RepresentationKind::Lsa { stopwords, weight, dims: None });
        }
    }
    kinds.push(RepresentationKind::Lexicon);
    for pretrained in [true, false] {
        for aggregation in [Aggregation::Mean, Aggregation::Sum] {
            kinds.push(RepresentationKind::Embedding {
                pretrained,
                aggregation,
                dim: DEFAULT_EMBEDDING_DIM,
                epochs: DEFAULT_EMBEDDING_EPOCHS,
            });
        }
    }
    RepresentationRegistry::from_kinds(kinds).expect("default registry is valid")
}

/// External resources some representations need.
#[derive(Debug, Clone, Default)]
pub struct Resources {
    pub word_vectors: Option<Arc<WordVectors>>,
    pub lexicon: Option<Arc<CategoryLexicon>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixData {
    Sparse(CsrMatrix),
    Dense(DenseMatrix),
}

/// Document-by-feature matrix; row `i` is document `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub data: MatrixData,
    pub columns: Vec<String>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        match &self.data {
            MatrixData::Sparse(m) => m.n_rows(),
            MatrixData::Dense(m) => m.n_rows(),
        }
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn to_csr(&self) -> CsrMatrix {
        match &self.data {
            MatrixData::Sparse(m) => m.clone(),
            MatrixData::Dense(m) => m.to_csr(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match &self.data {
            MatrixData::Sparse(m) => m.to_dense(),
            MatrixData::Dense(m) => m.clone(),
        }
    }

    fn dense(m: DenseMatrix, prefix: &str) -> FeatureMatrix {
        let columns = (0..m.n_cols()).map(|i| format!("{prefix}{i}")).collect();
        FeatureMatrix { data: MatrixData::Dense(m), columns }
    }
}

/// Word terms of a document: lowercased word tokens without punctuation,
/// optionally without English stopwords.
pub fn word_terms(text: &str, stopwords: Stopwords) -> Vec<String> {
    let stop = data::english_stopwords();
    tokenize_words(text)
        .tokens
        .into_iter()
        .filter(|t| !crate::corpus::is_punct_token(t))
        .filter(|t| stopwords == Stopwords::None || !stop.contains(t.as_str()))
        .collect()
}

/// A representation fitted on a training corpus.
#[derive(Debug, Clone)]
pub enum FittedRepresentation {
    Ngram(NgramModel),
    Lda {
        model: TopicModel,
        stopwords: Stopwords,
    },
    Lsa {
        terms: NgramModel,
        /// n_terms × k projection.
        basis: DenseMatrix,
        degenerate: Vec<bool>,
    },
    Lexicon(Arc<CategoryLexicon>),
    Embedding {
        vectors: Arc<WordVectors>,
        aggregation: Aggregation,
    },
}

/// Fits `spec` on `train`.
///
/// Returns [`Error::RepresentationFailure`] when the data cannot support the
/// representation (for example an empty vocabulary) and
/// [`Error::Validation`] when a required resource is missing.
pub fn fit(
    spec: &RepresentationSpec,
    train: &LabeledCorpus,
    resources: &Resources,
    seed: u64,
) -> Result<FittedRepresentation> {
    spec.kind.validate()?;
    let texts: Vec<&str> = train.documents().iter().map(|d| d.text.as_str()).collect();
    match spec.kind {
        RepresentationKind::Ngram { analyzer, stopwords, range, weight } => {
            Ok(FittedRepresentation::Ngram(NgramModel::fit(&texts, analyzer, stopwords, range, weight, VOCAB_CAP)?))
        }
        RepresentationKind::Lda { stopwords, topics, iterations } => {
            let docs: Vec<Vec<String>> = texts.iter().map(|t| word_terms(t, stopwords)).collect();
            let cfg = LdaConfig { topics, iterations, ..LdaConfig::default() };
            Ok(FittedRepresentation::Lda { model: TopicModel::train(&docs, &cfg, seed)?, stopwords })
        }
        RepresentationKind::Lsa { stopwords, weight, dims } => {
            let terms = NgramModel::fit(&texts, Analyzer::Word, stopwords, (1, 1), weight, VOCAB_CAP)?;
            let x = terms.transform_texts(&texts);
            let cap = x.n_rows().min(x.n_cols());
            let k = dims.unwrap_or(DEFAULT_LSA_DIMS).min(cap);
            let svd = truncated_svd(&x, k, seed)?;
            let smax = svd.singular_values.first().copied().unwrap_or(0.0);
            let mut degenerate: Vec<bool> =
                svd.singular_values.iter().map(|&s| s <= 1e-10 * smax || s == 0.0).collect();
            let mut basis = svd.v;
            if dims.is_none() {
                // Without a configured size, keep exactly the numerical rank.
                let keep: Vec<usize> = (0..degenerate.len()).filter(|&j| !degenerate[j]).collect();
                if keep.is_empty() {
                    return Err(Error::RepresentationFailure("LSA training matrix has rank 0".into()));
                }
                basis = basis.select_columns(&keep);
                degenerate = vec![false; keep.len()];
            }
            Ok(FittedRepresentation::Lsa { terms, basis, degenerate })
        }
        RepresentationKind::Lexicon => {
            let lex = resources
                .lexicon
                .clone()
                .ok_or_else(|| Error::validation("lexicon representation requires a category lexicon"))?;
            Ok(FittedRepresentation::Lexicon(lex))
        }
        RepresentationKind::Embedding { pretrained, aggregation, dim, epochs } => {
            let vectors = if pretrained {
                resources
                    .word_vectors
                    .clone()
                    .ok_or_else(|| Error::validation("pretrained embedding representation requires word vectors"))?
            } else {
                let docs: Vec<Vec<String>> = texts.iter().map(|t| word_terms(t, Stopwords::None)).collect();
                if docs.iter().all(Vec::is_empty) {
                    return Err(Error::RepresentationFailure("no tokens to train embeddings on".into()));
                }
                let cfg = SkipGramConfig { dim, epochs, ..SkipGramConfig::default() };
                Arc::new(train_embeddings(&docs, &cfg, seed))
            };
            Ok(FittedRepresentation::Embedding { vectors, aggregation })
        }
    }
}

impl FittedRepresentation {
    /// Applies the fitted representation to every document of `corpus`.
    pub fn transform(&self, corpus: &LabeledCorpus) -> Result<FeatureMatrix> {
        let texts: Vec<&str> = corpus.documents().iter().map(|d| d.text.as_str()).collect();
        self.transform_texts(&texts)
    }

    pub fn transform_texts(&self, texts: &[&str]) -> Result<FeatureMatrix> {
        let out = match self {
            FittedRepresentation::Ngram(m) => FeatureMatrix {
                data: MatrixData::Sparse(m.transform_texts(texts)),
                columns: m.vocabulary().terms().to_vec(),
            },
            FittedRepresentation::Lda { model, stopwords } => {
                let mut m = DenseMatrix::zeros(texts.len(), model.topics());
                for (i, t) in texts.iter().enumerate() {
                    m.row_mut(i).copy_from_slice(&model.infer(&word_terms(t, *stopwords)));
                }
                FeatureMatrix::dense(m, "topic_")
            }
            FittedRepresentation::Lsa { terms, basis, degenerate } => {
                let x = terms.transform_texts(texts);
                let mut m = x.mul_dense(basis);
                for r in 0..m.n_rows() {
                    for (v, &d) in m.row_mut(r).iter_mut().zip(degenerate) {
                        if d {
                            *v = 0.0;
                        }
                    }
                }
                FeatureMatrix::dense(m, "lsa_")
            }
            FittedRepresentation::Lexicon(lex) => {
                let mut m = DenseMatrix::zeros(texts.len(), lex.len());
                for (i, t) in texts.iter().enumerate() {
                    m.row_mut(i).copy_from_slice(&lexicon_features(&word_terms(t, Stopwords::None), lex));
                }
                FeatureMatrix { data: MatrixData::Dense(m), columns: lex.category_names() }
            }
            FittedRepresentation::Embedding { vectors, aggregation } => {
                let mut m = DenseMatrix::zeros(texts.len(), vectors.dim());
                for (i, t) in texts.iter().enumerate() {
                    m.row_mut(i).copy_from_slice(&aggregate_embeddings(
                        &word_terms(t, Stopwords::None),
                        vectors,
                        *aggregation,
                    ));
                }
                FeatureMatrix::dense(m, "dim_")
            }
        };
        let finite = match &out.data {
            MatrixData::Sparse(m) => (0..m.n_rows()).all(|r| m.row(r).1.iter().all(|v| v.is_finite())),
            MatrixData::Dense(m) => m.as_slice().iter().all(|v| v.is_finite()),
        };
        if !finite {
            return Err(Error::RepresentationFailure("non-finite feature values".into()));
        }
        Ok(out)
    }
}

/// Fits `spec` on `train` and transforms `apply_to`.
pub fn vectorize(
    spec: &RepresentationSpec,
    train: &LabeledCorpus,
    apply_to: &LabeledCorpus,
    resources: &Resources,
    seed: u64,
) -> Result<FeatureMatrix> {
    fit(spec, train, resources, seed)?.transform(apply_to)
}
