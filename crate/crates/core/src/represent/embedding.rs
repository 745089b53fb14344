use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use super::Aggregation;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::seed::rng_for;

/// Dense word vectors of a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectors {
    dim: usize,
    vectors: HashMap<String, Vec<f32>>,
}

impl WordVectors {
    pub fn new(dim: usize) -> Self {
        WordVectors { dim, vectors: HashMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    /// Inserts or replaces a vector. Returns false (and stores nothing) on a
    /// dimension mismatch.
    pub fn insert(&mut self, token: impl Into<String>, v: Vec<f32>) -> bool {
        if v.len() != self.dim {
            return false;
        }
        self.vectors.insert(token.into(), v);
        true
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let (x, y) = (self.get(a)?, self.get(b)?);
        let dot: f64 = x.iter().zip(y).map(|(p, q)| *p as f64 * *q as f64).sum();
        let nx: f64 = x.iter().map(|p| (*p as f64).powi(2)).sum::<f64>().sqrt();
        let ny: f64 = y.iter().map(|p| (*p as f64).powi(2)).sum::<f64>().sqrt();
        if nx == 0.0 || ny == 0.0 {
            return Some(0.0);
        }
        Some(dot / (nx * ny))
    }
}

/// Reads the standard text format: a `count dim` header, then one
/// `token v1 … vdim` line per word. A repeated token keeps its last vector.
pub fn load_word_vectors(path: &Path) -> Result<WordVectors> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let perr = |line: usize, msg: String| Error::parse(Some(path.to_owned()), Some(line), msg);
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| perr(1, "empty word-vector file".into()))?;
    let mut h = header.split_whitespace();
    let parse_usize = |s: Option<&str>| s.and_then(|s| s.parse::<usize>().ok());
    let (Some(count), Some(dim)) = (parse_usize(h.next()), parse_usize(h.next())) else {
        return Err(perr(1, format!("expected header `count dim`, found {header:?}")));
    };
    if dim == 0 {
        return Err(perr(1, "dimension must be positive".into()));
    }
    let mut wv = WordVectors::new(dim);
    let mut seen = 0usize;
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let token = parts.next().expect("non-empty line");
        let values: Vec<f32> = parts
            .map(|p| p.parse::<f32>().map_err(|_| perr(line_no, format!("invalid number {p:?}"))))
            .collect::<Result<_>>()?;
        if values.len() != dim {
            return Err(perr(line_no, format!("token {token:?} has {} values, header declares {dim}", values.len())));
        }
        if wv.get(token).is_some() {
            log::warn!("{}:{line_no}: duplicate token {token:?}, keeping the later vector", path.display());
        }
        wv.insert(token, values);
        seen += 1;
    }
    if seen != count {
        log::warn!("{}: header declares {count} vectors, found {seen}", path.display());
    }
    Ok(wv)
}

/// Writes vectors in the text format read by [`load_word_vectors`], tokens
/// sorted.
pub fn save_word_vectors(vectors: &WordVectors, path: &Path) -> Result<()> {
    let mut keys: Vec<&String> = vectors.vectors.keys().collect();
    keys.sort();
    let mut out = format!("{} {}\n", keys.len(), vectors.dim);
    for k in keys {
        out.push_str(k);
        for v in &vectors.vectors[k] {
            write!(out, " {v}").expect("write to string");
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Mean or sum of the vectors of in-vocabulary tokens; zero vector when
/// none is known.
pub fn aggregate_embeddings(tokens: &[String], vectors: &WordVectors, mode: Aggregation) -> Vec<f64> {
    let mut acc = vec![0.0; vectors.dim()];
    let mut hits = 0usize;
    for t in tokens {
        if let Some(v) = vectors.get(t) {
            hits += 1;
            for (a, &x) in acc.iter_mut().zip(v) {
                *a += x as f64;
            }
        }
    }
    if mode == Aggregation::Mean && hits > 0 {
        acc.iter_mut().for_each(|a| *a /= hits as f64);
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub epochs: usize,
    pub window: usize,
    pub negatives: usize,
    pub learning_rate: f64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            dim: super::DEFAULT_EMBEDDING_DIM,
            epochs: super::DEFAULT_EMBEDDING_EPOCHS,
            window: 5,
            negatives: 5,
            learning_rate: 0.025,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x > 30.0 {
        1.0
    } else if x < -30.0 {
        0.0
    } else {
        1.0 / (1.0 + (-x).exp())
    }
}

/// Skip-gram with negative sampling over tokenized documents. Context
/// windows never cross document boundaries.
pub fn train_embeddings(docs: &[Vec<String>], cfg: &SkipGramConfig, seed: u64) -> WordVectors {
    let vocab = Vocabulary::from_tokens(docs.iter().flatten().map(String::as_str), None);
    let (v, dim) = (vocab.len(), cfg.dim);
    let mut out = WordVectors::new(dim);
    if v == 0 {
        return out;
    }
    let mut rng = rng_for(seed, &[b"skipgram"]);
    let mut syn0: Vec<f64> = (0..v * dim).map(|_| (rng.random::<f64>() - 0.5) / dim as f64).collect();
    let mut syn1 = vec![0.0; v * dim];

    // Cumulative unigram^0.75 distribution for negative draws.
    let mut cdf = Vec::with_capacity(v);
    let mut acc = 0.0;
    for &f in vocab.frequencies() {
        acc += (f as f64).powf(0.75);
        cdf.push(acc);
    }
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        let u = rng.random::<f64>() * acc;
        cdf.partition_point(|&c| c <= u).min(v - 1)
    };

    let ids: Vec<Vec<usize>> = docs.iter().map(|d| d.iter().filter_map(|t| vocab.get(t)).collect()).collect();
    let total = (cfg.epochs * ids.iter().map(Vec::len).sum::<usize>()).max(1) as f64;
    let mut processed = 0usize;
    let mut grad = vec![0.0; dim];
    for _ in 0..cfg.epochs {
        for doc in &ids {
            for (pos, &center) in doc.iter().enumerate() {
                let lr = cfg.learning_rate * (1.0 - processed as f64 / total).max(1e-4);
                processed += 1;
                let lo = pos.saturating_sub(cfg.window);
                let hi = (pos + cfg.window).min(doc.len() - 1);
                for (cpos, &ctx) in doc.iter().enumerate().take(hi + 1).skip(lo) {
                    if cpos == pos {
                        continue;
                    }
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let input = &syn0[ctx * dim..(ctx + 1) * dim];
                    for d in 0..=cfg.negatives {
                        let (target, label) = if d == 0 {
                            (center, 1.0)
                        } else {
                            let t = draw(&mut rng);
                            if t == center {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let out_vec = &mut syn1[target * dim..(target + 1) * dim];
                        let f: f64 = input.iter().zip(out_vec.iter()).map(|(a, b)| a * b).sum();
                        let g = (label - sigmoid(f)) * lr;
                        for ((gr, o), &x) in grad.iter_mut().zip(out_vec.iter_mut()).zip(input) {
                            *gr += g * *o;
                            *o += g * x;
                        }
                    }
                    for (x, g) in syn0[ctx * dim..(ctx + 1) * dim].iter_mut().zip(&grad) {
                        *x += g;
                    }
                }
            }
        }
    }
    for (i, term) in vocab.terms().iter().enumerate() {
        out.insert(term.clone(), syn0[i * dim..(i + 1) * dim].iter().map(|&x| x as f32).collect());
    }
    out
}
