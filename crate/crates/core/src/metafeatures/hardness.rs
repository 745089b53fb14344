//! Corpus hardness measures.

use std::collections::{BTreeMap, HashSet};

use crate::corpus::{tokenize_words, LabeledCorpus};
use crate::data::english_stopwords_sorted;

/// SVB, UVB, MRH_J, CI, SEM, VL, VDR and average word length.
pub fn hardness_features(corpus: &LabeledCorpus) -> [f64; 8] {
    let docs: Vec<Vec<String>> =
        corpus.documents().iter().map(|d| tokenize_words(&d.text).words().map(str::to_owned).collect()).collect();
    hardness_from_tokens(corpus, &docs)
}

pub(crate) fn hardness_from_tokens(corpus: &LabeledCorpus, docs: &[Vec<String>]) -> [f64; 8] {
    let mut vocab: HashSet<&str> = HashSet::new();
    let mut by_cat: BTreeMap<&str, HashSet<&str>> = BTreeMap::new();
    let mut cat_tokens: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for c in corpus.categories() {
        by_cat.insert(c, HashSet::new());
        cat_tokens.insert(c, Vec::new());
    }
    let mut per_doc_vocab = 0usize;
    let mut chars = 0usize;
    let mut n_tokens = 0usize;
    for (d, toks) in corpus.documents().iter().zip(docs) {
        let mut own: HashSet<&str> = HashSet::new();
        let cat = by_cat.get_mut(d.label.as_str()).expect("label is a category");
        let ct = cat_tokens.get_mut(d.label.as_str()).expect("label is a category");
        for t in toks {
            vocab.insert(t);
            cat.insert(t);
            own.insert(t);
            ct.push(t);
            chars += t.chars().count();
        }
        n_tokens += toks.len();
        per_doc_vocab += own.len();
    }
    let v = vocab.len() as f64;
    let cats: Vec<&HashSet<&str>> = by_cat.values().collect();

    let svb =
        if vocab.is_empty() { 1.0 } else { cats.iter().map(|c| c.len() as f64 / v).sum::<f64>() / cats.len() as f64 };
    let uvb = if per_doc_vocab == 0 { 1.0 } else { v / per_doc_vocab as f64 };

    let mut jacc = Vec::new();
    for i in 0..cats.len() {
        for j in i + 1..cats.len() {
            let inter = cats[i].intersection(cats[j]).count();
            let union = cats[i].len() + cats[j].len() - inter;
            jacc.push(if union == 0 { 1.0 } else { inter as f64 / union as f64 });
        }
    }
    let mrh_j = mean_or(&jacc, 1.0);

    let sizes = corpus.category_sizes();
    let max = *sizes.iter().max().unwrap_or(&1) as f64;
    let min = (*sizes.iter().min().unwrap_or(&1)).max(1) as f64;
    let ci = max / min;

    let stop = english_stopwords_sorted();
    let profiles: Vec<Vec<f64>> = cat_tokens
        .values()
        .map(|toks| {
            let mut counts: BTreeMap<&str, f64> = BTreeMap::new();
            for t in toks {
                *counts.entry(t).or_default() += 1.0;
            }
            let n = toks.len().max(1) as f64;
            stop.iter().map(|w| counts.get(w.as_str()).copied().unwrap_or(0.0) / n).collect()
        })
        .collect();
    let mut cos = Vec::new();
    for i in 0..profiles.len() {
        for j in i + 1..profiles.len() {
            cos.push(cosine(&profiles[i], &profiles[j]));
        }
    }
    let sem = mean_or(&cos, 1.0);

    let vdr = v / corpus.len().max(1) as f64;
    let avg_word_length = if n_tokens == 0 { 0.0 } else { chars as f64 / n_tokens as f64 };
    [svb, uvb, mrh_j, ci, sem, v, vdr, avg_word_length]
}

fn mean_or(values: &[f64], empty: f64) -> f64 {
    if values.is_empty() {
        empty
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn corpus(docs: &[(&str, &str)]) -> LabeledCorpus {
        LabeledCorpus::new_unchecked_categories("t", docs.iter().map(|(t, l)| Document::new(*t, *l)).collect()).unwrap()
    }

    #[test]
    fn two_doc_hand_counts() {
        let h = hardness_features(&corpus(&[("a b", "x"), ("c", "y")]));
        // |V| = 3, Σ|V_d| = 3, |D| = 2
        assert_eq!(h[1], 1.0);
        assert_eq!(h[6], 1.5);
        assert_eq!(h[5], 3.0);
        assert_eq!(h[2], 0.0);
        assert_eq!(h[3], 1.0);
    }

    #[test]
    fn single_category_extremes() {
        let h = hardness_features(&corpus(&[("a b", "x"), ("b c", "x")]));
        assert_eq!(h[0], 1.0);
        assert_eq!(h[2], 1.0);
        assert_eq!(h[4], 1.0);
    }

    #[test]
    fn jaccard_extremes_and_imbalance() {
        let same = hardness_features(&corpus(&[("a b", "x"), ("b a", "y"), ("a", "y")]));
        assert_eq!(same[2], 1.0);
        assert_eq!(same[3], 2.0);
        let disjoint = hardness_features(&corpus(&[("a b", "x"), ("c d", "y")]));
        assert_eq!(disjoint[2], 0.0);
        assert_eq!(disjoint[0], 0.5);
    }

    #[test]
    fn stopword_profiles() {
        let h = hardness_features(&corpus(&[("the cat and the dog", "x"), ("the bird and the fish", "y")]));
        assert!((h[4] - 1.0).abs() < 1e-12);
        // a category without stopwords has a zero profile
        let h = hardness_features(&corpus(&[("the cat", "x"), ("dog bird", "y")]));
        assert_eq!(h[4], 0.0);
    }

    #[test]
    fn average_word_length_skips_punctuation() {
        let h = hardness_features(&corpus(&[("ab , abcd !", "x"), ("abc", "y")]));
        assert_eq!(h[7], 3.0);
    }
}
