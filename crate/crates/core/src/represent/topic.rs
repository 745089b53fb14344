//! Latent Dirichlet allocation trained by collapsed Gibbs sampling.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::seed::rng_for;

#[derive(Debug, Clone, PartialEq)]
pub struct LdaConfig {
    pub topics: usize,
    pub iterations: usize,
    /// Document-topic prior; `None` means `50 / topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    /// Gibbs sweeps per document at inference time.
    pub inference_sweeps: usize,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            topics: super::DEFAULT_TOPICS,
            iterations: super::DEFAULT_LDA_ITERATIONS,
            alpha: None,
            beta: 0.01,
            inference_sweeps: 20,
        }
    }
}

/// Trained topic-word counts plus the priors needed for inference.
#[derive(Debug, Clone)]
pub struct TopicModel {
    vocab: Vocabulary,
    topics: usize,
    alpha: f64,
    beta: f64,
    sweeps: usize,
    seed: u64,
    /// topics × vocab, row-major.
    topic_word: Vec<u32>,
    topic_totals: Vec<u32>,
}

impl TopicModel {
    /// Trains on tokenized documents. Fails when no document has a token.
    pub fn train(docs: &[Vec<String>], cfg: &LdaConfig, seed: u64) -> Result<TopicModel> {
        let k = cfg.topics;
        if k < 2 {
            return Err(Error::validation("LDA needs at least 2 topics"));
        }
        let vocab = Vocabulary::from_tokens(docs.iter().flatten().map(String::as_str), None);
        if vocab.is_empty() {
            return Err(Error::RepresentationFailure("LDA training corpus has no tokens".into()));
        }
        let v = vocab.len();
        let alpha = cfg.alpha.unwrap_or(50.0 / k as f64);
        let beta = cfg.beta;
        let words: Vec<Vec<usize>> = docs.iter().map(|d| d.iter().filter_map(|t| vocab.get(t)).collect()).collect();

        let mut rng = rng_for(seed, &[b"lda-train"]);
        let mut topic_word = vec![0u32; k * v];
        let mut topic_totals = vec![0u32; k];
        let mut doc_topic = vec![0u32; words.len() * k];
        let mut z: Vec<Vec<usize>> = Vec::with_capacity(words.len());
        for (d, doc) in words.iter().enumerate() {
            let mut zd = Vec::with_capacity(doc.len());
            for &w in doc {
                let t = rng.random_range(0..k);
                zd.push(t);
                topic_word[t * v + w] += 1;
                topic_totals[t] += 1;
                doc_topic[d * k + t] += 1;
            }
            z.push(zd);
        }

        let vbeta = v as f64 * beta;
        let mut p = vec![0.0; k];
        for _ in 0..cfg.iterations {
            for (d, doc) in words.iter().enumerate() {
                for (i, &w) in doc.iter().enumerate() {
                    let old = z[d][i];
                    topic_word[old * v + w] -= 1;
                    topic_totals[old] -= 1;
                    doc_topic[d * k + old] -= 1;
                    for t in 0..k {
                        p[t] = (doc_topic[d * k + t] as f64 + alpha) * (topic_word[t * v + w] as f64 + beta)
                            / (topic_totals[t] as f64 + vbeta);
                    }
                    let t = sample(&p, &mut rng);
                    z[d][i] = t;
                    topic_word[t * v + w] += 1;
                    topic_totals[t] += 1;
                    doc_topic[d * k + t] += 1;
                }
            }
        }
        Ok(TopicModel { vocab, topics: k, alpha, beta, sweeps: cfg.inference_sweeps, seed, topic_word, topic_totals })
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Smoothed topic-word distribution `φ_k`.
    pub fn topic_distribution(&self, topic: usize) -> Vec<f64> {
        let v = self.vocab.len();
        let denom = self.topic_totals[topic] as f64 + v as f64 * self.beta;
        self.topic_word[topic * v..(topic + 1) * v].iter().map(|&c| (c as f64 + self.beta) / denom).collect()
    }

    /// Topic proportions of a new document with the topic-word counts held
    /// fixed. The sampler is seeded from the document content, so equal
    /// documents always get equal vectors. Documents without a known token
    /// get the uniform distribution.
    pub fn infer(&self, tokens: &[String]) -> Vec<f64> {
        let k = self.topics;
        let v = self.vocab.len();
        let words: Vec<usize> = tokens.iter().filter_map(|t| self.vocab.get(t)).collect();
        if words.is_empty() {
            return vec![1.0 / k as f64; k];
        }
        let joined = tokens.join(" ");
        let mut rng = rng_for(self.seed, &[b"lda-infer", joined.as_bytes()]);
        let vbeta = v as f64 * self.beta;
        let mut counts = vec![0u32; k];
        let mut z: Vec<usize> = words
            .iter()
            .map(|_| {
                let t = rng.random_range(0..k);
                counts[t] += 1;
                t
            })
            .collect();
        let mut p = vec![0.0; k];
        for _ in 0..self.sweeps {
            for (i, &w) in words.iter().enumerate() {
                counts[z[i]] -= 1;
                for t in 0..k {
                    p[t] = (counts[t] as f64 + self.alpha) * (self.topic_word[t * v + w] as f64 + self.beta)
                        / (self.topic_totals[t] as f64 + vbeta);
                }
                let t = sample(&p, &mut rng);
                z[i] = t;
                counts[t] += 1;
            }
        }
        let denom = words.len() as f64 + k as f64 * self.alpha;
        counts.iter().map(|&c| (c as f64 + self.alpha) / denom).collect()
    }
}

fn sample(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}
