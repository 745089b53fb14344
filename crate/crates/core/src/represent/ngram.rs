use std::collections::{HashMap, HashSet};

use super::{word_terms, Analyzer, Stopwords, Weighting};
use crate::corpus::{char_tokens, Vocabulary};
use crate::error::{Error, Result};
use crate::numerics::{CsrBuilder, CsrMatrix};

/// Fitted bag-of-n-grams vectorizer.
#[derive(Debug, Clone)]
pub struct NgramModel {
    analyzer: Analyzer,
    stopwords: Stopwords,
    range: (usize, usize),
    weight: Weighting,
    vocab: Vocabulary,
    idf: Vec<f64>,
}

impl NgramModel {
    /// Learns the vocabulary (capped at `cap` by corpus frequency) and
    /// smoothed idf `ln((1 + n) / (1 + df)) + 1` from `texts`.
    pub fn fit(
        texts: &[&str],
        analyzer: Analyzer,
        stopwords: Stopwords,
        range: (usize, usize),
        weight: Weighting,
        cap: usize,
    ) -> Result<NgramModel> {
        let mut freq: HashMap<String, u64> = HashMap::new();
        let mut df: HashMap<String, u64> = HashMap::new();
        for text in texts {
            let grams = extract(text, analyzer, stopwords, range);
            let mut seen: HashSet<&str> = HashSet::new();
            for g in &grams {
                *freq.entry(g.clone()).or_default() += 1;
                if seen.insert(g.as_str()) {
                    *df.entry(g.clone()).or_default() += 1;
                }
            }
        }
        let vocab = Vocabulary::from_counts(freq, Some(cap));
        if vocab.is_empty() {
            return Err(Error::RepresentationFailure(
                "empty vocabulary after tokenization and stopword removal".into(),
            ));
        }
        let n = texts.len() as f64;
        let idf = vocab.terms().iter().map(|t| ((1.0 + n) / (1.0 + df[t] as f64)).ln() + 1.0).collect();
        Ok(NgramModel { analyzer, stopwords, range, weight, vocab, idf })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    /// Document-term matrix; tf-idf rows are L2-normalized.
    pub fn transform_texts(&self, texts: &[&str]) -> CsrMatrix {
        let mut b = CsrBuilder::new(self.vocab.len());
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for text in texts {
            counts.clear();
            for g in extract(text, self.analyzer, self.stopwords, self.range) {
                if let Some(i) = self.vocab.get(&g) {
                    *counts.entry(i).or_default() += 1.0;
                }
            }
            let mut row: Vec<(usize, f64)> = counts
                .iter()
                .map(|(&i, &c)| match self.weight {
                    Weighting::Binary => (i, 1.0),
                    Weighting::Tf => (i, c),
                    Weighting::Tfidf => (i, c * self.idf[i]),
                })
                .collect();
            row.sort_unstable_by_key(|&(i, _)| i);
            if self.weight == Weighting::Tfidf {
                let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    row.iter_mut().for_each(|(_, v)| *v /= norm);
                }
            }
            b.push_row(row);
        }
        b.finish()
    }
}

/// The n-grams of one document, in order of occurrence.
pub(crate) fn extract(text: &str, analyzer: Analyzer, stopwords: Stopwords, range: (usize, usize)) -> Vec<String> {
    let terms = word_terms(text, stopwords);
    let units: Vec<String> = match analyzer {
        Analyzer::Word => terms,
        Analyzer::Char => char_tokens(terms.iter().map(String::as_str)).tokens,
    };
    let sep = match analyzer {
        Analyzer::Word => " ",
        Analyzer::Char => "",
    };
    let mut out = Vec::new();
    for n in range.0..=range.1 {
        if units.len() < n {
            break;
        }
        for w in units.windows(n) {
            out.push(w.join(sep));
        }
    }
    out
}
