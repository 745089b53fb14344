//! The 72-entry meta-feature vector describing a labeled corpus.
//!
//! Seven groups in fixed order: general (2), hardness (8), statistical (24),
//! landmarking (5), principal components (11), part-of-speech profile (12)
//! and readability (10). Names come from the bundled, versioned name list.
//! Extraction runs on the canonicalized corpus, so the result depends only
//! on corpus content, the seed and the POS lexicon.

mod hardness;
mod pos;
mod readability;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{stratified_split, tokenize_words, LabeledCorpus};
use crate::data;
use crate::error::{Error, Result};
use crate::io::to_csv;
use crate::learners::{fit_landmarker, score, LandmarkerKind};
use crate::numerics::{pca_explained, stats_block, StatsBlock};
use crate::represent::{Analyzer, NgramModel, Stopwords, Weighting, VOCAB_CAP};
use crate::seed::sha256_hex;

pub use hardness::hardness_features;
pub use pos::{pos_profile, PosLexicon, PosTag};
pub use readability::{readability, syllables, Readability};

pub const N_META_FEATURES: usize = 72;
/// Terms kept in the landmarking TF matrix.
pub const LANDMARK_TOP_TERMS: usize = 1000;
pub const LANDMARK_TRAIN_FRACTION: f64 = 0.7;
/// Principal components computed for the PC statistics.
pub const PCA_MAX_COMPONENTS: usize = 100;
/// Cumulative variance share that defines pcac.
pub const PCAC_THRESHOLD: f64 = 0.95;
/// Version of the hardness definitions and group composition.
pub const EXTRACTOR_VERSION: &str = "v1";

/// Fixed settings of the extractor, recorded with every vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractorSettings {
    pub extractor_version: String,
    pub names_version: String,
    pub landmark_top_terms: usize,
    pub landmark_train_fraction: f64,
    pub landmark_tree_depth: usize,
    pub pca_max_components: usize,
    pub pcac_threshold: f64,
    pub readability_aggregation: String,
    pub data_files: BTreeMap<String, String>,
}

impl ExtractorSettings {
    pub fn current() -> Self {
        ExtractorSettings {
            extractor_version: EXTRACTOR_VERSION.to_owned(),
            names_version: data::METAFEATURE_NAMES_VERSION.to_owned(),
            landmark_top_terms: LANDMARK_TOP_TERMS,
            landmark_train_fraction: LANDMARK_TRAIN_FRACTION,
            landmark_tree_depth: crate::learners::LANDMARK_TREE_DEPTH,
            pca_max_components: PCA_MAX_COMPONENTS,
            pcac_threshold: PCAC_THRESHOLD,
            readability_aggregation: "macro".to_owned(),
            data_files: data::data_file_hashes(),
        }
    }

    /// Hash identifying these settings.
    pub fn signature(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("settings serialize").as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionMetadata {
    pub seed: u64,
    pub category_cap: Option<usize>,
    pub corpus_hash: String,
    pub pos_lexicon_hash: String,
    pub settings: ExtractorSettings,
}

/// Exactly 72 finite values in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaFeatureVector {
    pub corpus: String,
    pub values: Vec<f64>,
    pub metadata: ExtractionMetadata,
}

impl MetaFeatureVector {
    pub fn names() -> &'static [String] {
        data::metafeature_names()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Self::names().iter().position(|n| n == name).map(|i| self.values[i])
    }

    /// `{"corpus": …, "features": {name: value, …}, "metadata": …}` with
    /// features in canonical order.
    pub fn to_json(&self) -> serde_json::Value {
        let mut features = serde_json::Map::new();
        for (n, v) in Self::names().iter().zip(&self.values) {
            features.insert(n.clone(), serde_json::json!(v));
        }
        serde_json::json!({
            "corpus": self.corpus,
            "features": features,
            "metadata": self.metadata,
        })
    }
}

/// One CSV row per vector: `corpus` followed by the 72 names.
pub fn meta_vectors_to_csv(vectors: &[MetaFeatureVector]) -> Result<Vec<u8>> {
    let mut header = vec!["corpus".to_owned()];
    header.extend(MetaFeatureVector::names().iter().cloned());
    to_csv(
        &header,
        vectors.iter().map(|v| {
            let mut row = vec![v.corpus.clone()];
            row.extend(v.values.iter().map(|x| x.to_string()));
            row
        }),
    )
}

/// Computes the meta-feature vector of `corpus`.
pub fn extract(corpus: &LabeledCorpus, seed: u64, pos_lexicon: &PosLexicon) -> Result<MetaFeatureVector> {
    if corpus.is_empty() {
        return Err(Error::validation("cannot extract meta-features from an empty corpus"));
    }
    let canon = corpus.canonicalized();
    let words: Vec<Vec<String>> =
        canon.documents().iter().map(|d| tokenize_words(&d.text).words().map(str::to_owned).collect()).collect();

    let mut values = Vec::with_capacity(N_META_FEATURES);
    values.push(canon.len() as f64);
    values.push(canon.categories().len() as f64);
    values.extend(hardness::hardness_from_tokens(&canon, &words));
    values.extend(statistical(&canon, &words)?);
    values.extend(landmarking(&canon, seed));
    values.extend(pc_statistics(&canon, seed));
    values.extend(pos_profile(&canon, pos_lexicon));
    values.extend(readability_block(&canon));
    debug_assert_eq!(values.len(), N_META_FEATURES);
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::validation(format!("meta-feature {} is not finite", MetaFeatureVector::names()[i])));
    }
    Ok(MetaFeatureVector {
        corpus: corpus.name().to_owned(),
        values,
        metadata: ExtractionMetadata {
            seed,
            category_cap: corpus.per_category_cap(),
            corpus_hash: corpus.content_hash_hex(),
            pos_lexicon_hash: pos_lexicon.content_hash().to_owned(),
            settings: ExtractorSettings::current(),
        },
    })
}

fn block_or_zero(values: &[f64]) -> StatsBlock {
    stats_block(values).unwrap_or(StatsBlock {
        min: 0.0,
        max: 0.0,
        mean: 0.0,
        std: 0.0,
        skewness: 0.0,
        kurtosis: 0.0,
        mean_std_ratio: 0.0,
        entropy: 0.0,
    })
}

/// Stats over term frequencies, documents per category and words per
/// document.
fn statistical(corpus: &LabeledCorpus, words: &[Vec<String>]) -> Result<Vec<f64>> {
    let mut freq: BTreeMap<&str, f64> = BTreeMap::new();
    for t in words.iter().flatten() {
        *freq.entry(t).or_default() += 1.0;
    }
    let vocab: Vec<f64> = freq.into_values().collect();
    let per_cat: Vec<f64> = corpus.category_sizes().iter().map(|&n| n as f64).collect();
    let per_doc: Vec<f64> = words.iter().map(|w| w.len() as f64).collect();
    let mut out = Vec::with_capacity(24);
    out.extend(block_or_zero(&vocab).to_array());
    out.extend(stats_block(&per_cat)?.to_array());
    out.extend(stats_block(&per_doc)?.to_array());
    Ok(out)
}

/// Landmarker accuracies on a stratified split of the top-term TF matrix,
/// then the fraction of zeros in that matrix. Accuracies fall back to 0
/// when the corpus has no terms or a category is too small to split.
fn landmarking(corpus: &LabeledCorpus, seed: u64) -> [f64; 5] {
    let texts: Vec<&str> = corpus.documents().iter().map(|d| d.text.as_str()).collect();
    let Ok(tf) = NgramModel::fit(&texts, Analyzer::Word, Stopwords::None, (1, 1), Weighting::Tf, LANDMARK_TOP_TERMS)
    else {
        return [0.0, 0.0, 0.0, 0.0, 1.0];
    };
    let x = tf.transform_texts(&texts);
    let mut out = [0.0; 5];
    out[4] = x.zero_fraction();
    let Ok(split) = stratified_split(corpus, LANDMARK_TRAIN_FRACTION, seed) else {
        return out;
    };
    let labels = corpus.label_indices();
    let pick = |idx: &[usize]| idx.iter().map(|&i| labels[i]).collect::<Vec<_>>();
    let (x_tr, y_tr) = (x.select_rows(&split.train), pick(&split.train));
    let (x_te, y_te) = (x.select_rows(&split.test), pick(&split.test));
    for (slot, kind) in LandmarkerKind::ALL.into_iter().enumerate() {
        out[slot] = fit_landmarker(kind, &x_tr, &y_tr).and_then(|m| score(m.as_ref(), &x_te, &y_te)).unwrap_or(0.0);
    }
    out
}

/// pcac, Σσ, Σ explained ratio, Σλ, λ₁, and six statistics over λ.
fn pc_statistics(corpus: &LabeledCorpus, seed: u64) -> [f64; 11] {
    let texts: Vec<&str> = corpus.documents().iter().map(|d| d.text.as_str()).collect();
    let pca = NgramModel::fit(&texts, Analyzer::Word, Stopwords::None, (1, 1), Weighting::Tfidf, VOCAB_CAP)
        .ok()
        .and_then(|m| pca_explained(&m.transform_texts(&texts), PCA_MAX_COMPONENTS, seed).ok());
    let mut out = [0.0; 11];
    out[0] = 1.0;
    let Some(p) = pca else {
        return out;
    };
    let lambda = &p.explained_variance;
    let k = lambda.len();
    let total = p.total_variance;
    let ev_sum: f64 = lambda.iter().sum();
    if total > 0.0 && k > 0 {
        let mut cum = 0.0;
        for (m, l) in lambda.iter().enumerate() {
            cum += l;
            if cum >= PCAC_THRESHOLD * total {
                out[0] = (m + 1) as f64 / k as f64;
                break;
            }
        }
    }
    out[1] = p.singular_values.iter().sum();
    out[2] = if total > 0.0 { ev_sum / total } else { 0.0 };
    out[3] = ev_sum;
    out[4] = lambda.first().copied().unwrap_or(0.0);
    let s = block_or_zero(lambda);
    out[5..11].copy_from_slice(&[s.min, s.max, s.mean, s.std, s.skewness, s.kurtosis]);
    out
}

/// Macro-averaged readability; documents without words count as zeros.
fn readability_block(corpus: &LabeledCorpus) -> [f64; 10] {
    let mut acc = [0.0; 10];
    for d in corpus.documents() {
        if let Ok(r) = readability(&d.text) {
            for (a, v) in acc.iter_mut().zip(r.to_array()) {
                *a += v;
            }
        }
    }
    let n = corpus.len().max(1) as f64;
    acc.map(|a| a / n)
}
