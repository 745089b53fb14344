//! Seeded generators of small labeled corpora and matching resources.
//!
//! Used by tests, benchmarks and the desk-scale experiments. Words are
//! pronounceable pseudo-words indexed by an integer; word `b * 1000 + j`
//! belongs to vocabulary block `b`. Block 0 is shared background vocabulary
//! and each category draws its signal words from its own block.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Document, LabeledCorpus};
use crate::data::english_stopwords_sorted;
use crate::represent::{CategoryLexicon, WordVectors};
use crate::seed::rng_for;

const ONSETS: [&str; 16] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st"];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
/// Words per vocabulary block.
pub const BLOCK: usize = 1000;

/// Pseudo-word for index `i`: at least two consonant-vowel syllables,
/// distinct for distinct indices.
pub fn pseudo_word(i: usize) -> String {
    let base = ONSETS.len() * VOWELS.len();
    let mut n = i;
    let mut out = String::new();
    for k in 0.. {
        let s = n % base;
        out.push_str(ONSETS[s / VOWELS.len()]);
        out.push_str(VOWELS[s % VOWELS.len()]);
        n /= base;
        if n == 0 && k >= 1 {
            break;
        }
    }
    out.push('x');
    out
}

/// Parameters of one synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub name: String,
    pub docs_per_category: Vec<usize>,
    /// Inclusive range of tokens per document.
    pub doc_len: (usize, usize),
    /// Probability that a token is a signal token of the document's category.
    pub signal: f64,
    /// Probability that a non-signal token is an English stopword.
    pub stopword_rate: f64,
    /// Carry the category signal in stopword preferences instead of
    /// category-specific content words.
    pub stopword_signal: bool,
    /// Signal words per category.
    pub class_vocab: usize,
    pub shared_vocab: usize,
    /// First vocabulary block used for category words.
    pub block_offset: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            name: "synthetic".into(),
            docs_per_category: vec![30, 30],
            doc_len: (20, 40),
            signal: 0.3,
            stopword_rate: 0.3,
            stopword_signal: false,
            class_vocab: 40,
            shared_vocab: 200,
            block_offset: 1,
            seed: 13,
        }
    }
}

/// Generates the corpus described by `spec`.
pub fn generate(spec: &SynthSpec) -> LabeledCorpus {
    let mut rng = rng_for(spec.seed, &[b"synth", spec.name.as_bytes()]);
    let stop = english_stopwords_sorted();
    let n_cats = spec.docs_per_category.len();
    let mut docs = Vec::new();
    for (c, &n) in spec.docs_per_category.iter().enumerate() {
        // Each category prefers its own slice of the stopword list.
        let slice = stop.len() / n_cats.max(1);
        let own_stops = &stop[c * slice..(c + 1) * slice];
        for _ in 0..n {
            let len = rng.random_range(spec.doc_len.0..=spec.doc_len.1);
            let mut words = Vec::with_capacity(len);
            for _ in 0..len {
                let w = if rng.random_bool(spec.signal) {
                    if spec.stopword_signal {
                        own_stops.choose(&mut rng).expect("non-empty").to_string()
                    } else {
                        let j = rng.random_range(0..spec.class_vocab);
                        pseudo_word((spec.block_offset + c) * BLOCK + j)
                    }
                } else if rng.random_bool(spec.stopword_rate) {
                    stop.choose(&mut rng).expect("non-empty").to_string()
                } else {
                    pseudo_word(zipf_index(&mut rng, spec.shared_vocab))
                };
                words.push(w);
            }
            docs.push(Document::new(sentences(&words, &mut rng), format!("c{c}")));
        }
    }
    LabeledCorpus::new(spec.name.clone(), docs).expect("generated corpus is valid")
}

/// Approximately Zipfian index in `0..n`.
fn zipf_index(rng: &mut ChaCha8Rng, n: usize) -> usize {
    let u: f64 = rng.random();
    ((n as f64 + 1.0).powf(u) - 1.0).floor().min(n as f64 - 1.0) as usize
}

fn sentences(words: &[String], rng: &mut ChaCha8Rng) -> String {
    let mut out = String::new();
    let mut left = rng.random_range(6..14);
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(w);
        left -= 1;
        if left == 0 || i + 1 == words.len() {
            out.push('.');
            left = rng.random_range(6..14);
        }
    }
    out
}

/// Two classes that differ only in whether the token `alpha` occurs.
pub fn marker_corpus(per_class: usize, seed: u64) -> LabeledCorpus {
    let mut rng = rng_for(seed, &[b"marker"]);
    let mut docs = Vec::new();
    for label in ["with", "without"] {
        for _ in 0..per_class {
            let len = rng.random_range(8..16);
            let mut words: Vec<String> = (0..len).map(|_| pseudo_word(zipf_index(&mut rng, 100))).collect();
            if label == "with" {
                let at = rng.random_range(0..=words.len());
                words.insert(at, "alpha".into());
            }
            docs.push(Document::new(words.join(" "), label));
        }
    }
    LabeledCorpus::new("marker", docs).expect("marker corpus is valid")
}

/// The same documents with labels permuted by `seed`.
pub fn shuffled_labels(corpus: &LabeledCorpus, seed: u64) -> LabeledCorpus {
    use rand::seq::SliceRandom;
    let mut labels: Vec<String> = corpus.documents().iter().map(|d| d.label.clone()).collect();
    labels.shuffle(&mut rng_for(seed, &[b"shuffle-labels"]));
    let docs = corpus.documents().iter().zip(labels).map(|(d, l)| Document::new(d.text.clone(), l)).collect();
    LabeledCorpus::new(format!("{}-shuffled", corpus.name()), docs).expect("same label multiset")
}

/// A mixed collection of `n` corpora varying category count, balance,
/// document length, signal strength and where the signal lives.
pub fn desk_corpora(n: usize, seed: u64) -> Vec<LabeledCorpus> {
    let mut rng = rng_for(seed, &[b"desk"]);
    (0..n)
        .map(|i| {
            let n_cats = [2, 2, 3, 4][i % 4];
            let base = rng.random_range(12..30);
            let imbalance: f64 = if i % 3 == 2 { 2.5 } else { 1.0 };
            let docs_per_category = (0..n_cats)
                .map(|c| ((base as f64) * imbalance.powf(c as f64 / (n_cats - 1) as f64)).round() as usize)
                .collect();
            let short = i % 2 == 0;
            generate(&SynthSpec {
                name: format!("desk{i:02}"),
                docs_per_category,
                doc_len: if short { (6, 14) } else { (30, 70) },
                signal: [0.08, 0.15, 0.3][i % 3],
                stopword_rate: [0.1, 0.4][(i / 2) % 2],
                stopword_signal: i % 5 == 3,
                class_vocab: [10, 40, 120][(i / 3) % 3],
                shared_vocab: 150 + 40 * (i % 4),
                block_offset: 1 + i % 7,
                seed: rng.random(),
            })
        })
        .collect()
}

/// Word vectors in which each vocabulary block forms a cluster. Covers the
/// first `per_block` words of blocks `0..blocks` and the English stopwords.
pub fn block_word_vectors(dim: usize, blocks: usize, per_block: usize, seed: u64) -> WordVectors {
    let mut rng = rng_for(seed, &[b"block-vectors"]);
    let gauss = |rng: &mut ChaCha8Rng| -> f32 {
        let d: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
        d as f32
    };
    let mut vectors = WordVectors::new(dim);
    for b in 0..blocks {
        let centroid: Vec<f32> = (0..dim).map(|_| gauss(&mut rng)).collect();
        for j in 0..per_block {
            let v = centroid.iter().map(|c| c + 0.5 * gauss(&mut rng)).collect();
            vectors.insert(pseudo_word(b * BLOCK + j), v);
        }
    }
    for w in english_stopwords_sorted() {
        let v = (0..dim).map(|_| gauss(&mut rng)).collect();
        vectors.insert(w.clone(), v);
    }
    vectors
}

/// A category lexicon with one category per vocabulary block.
pub fn block_lexicon(blocks: usize, per_block: usize) -> CategoryLexicon {
    let cats = (0..blocks)
        .map(|b| (format!("block{b}"), (0..per_block).map(|j| pseudo_word(b * BLOCK + j)).collect()))
        .collect();
    CategoryLexicon::new(cats).expect("non-empty lexicon")
}
