//! Labeled corpora: loading, tokenization, sentence splitting and
//! order-invariant stratified splits.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::seed::rng_for;

/// Default per-category document cap.
pub const DEFAULT_CATEGORY_CAP: usize = 90_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub text: String,
    pub label: String,
}

impl Document {
    pub fn new(text: impl Into<String>, label: impl Into<String>) -> Self {
        Document { text: text.into(), label: label.into() }
    }

    /// Hash of (label, text); identical documents hash identically.
    pub fn content_hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update((self.label.len() as u64).to_le_bytes());
        h.update(self.label.as_bytes());
        h.update(self.text.as_bytes());
        h.finalize().into()
    }

    fn check(&self) -> std::result::Result<(), &'static str> {
        if self.text.trim().is_empty() {
            return Err("document text is empty");
        }
        if self.label.is_empty() {
            return Err("document label is empty");
        }
        Ok(())
    }
}

/// A named sequence of labeled documents.
///
/// `categories` lists distinct labels in first-appearance order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCorpus {
    name: String,
    documents: Vec<Document>,
    categories: Vec<String>,
    per_category_cap: Option<usize>,
}

impl LabeledCorpus {
    /// Builds and validates a corpus. At least two categories are required.
    pub fn new(name: impl Into<String>, documents: Vec<Document>) -> Result<Self> {
        let corpus = Self::from_parts(name.into(), documents, None)?;
        corpus.require_categories(2)?;
        Ok(corpus)
    }

    /// Builds a corpus without the two-category requirement. Used for
    /// sub-corpora (folds) and single-category diagnostics.
    pub fn new_unchecked_categories(name: impl Into<String>, documents: Vec<Document>) -> Result<Self> {
        Self::from_parts(name.into(), documents, None)
    }

    fn from_parts(name: String, documents: Vec<Document>, cap: Option<usize>) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::validation(format!("corpus '{name}' has no documents")));
        }
        if cap == Some(0) {
            return Err(Error::validation("per-category cap must be positive"));
        }
        let mut categories: Vec<String> = Vec::new();
        for (i, d) in documents.iter().enumerate() {
            d.check().map_err(|m| Error::validation(format!("corpus '{name}', document {i}: {m}")))?;
            if !categories.contains(&d.label) {
                categories.push(d.label.clone());
            }
        }
        let corpus = LabeledCorpus { name, documents, categories, per_category_cap: cap };
        if let Some(cap) = cap {
            if corpus.category_sizes().iter().any(|&n| n > cap) {
                return Err(Error::validation("a category exceeds the per-category cap"));
            }
        }
        Ok(corpus)
    }

    pub fn require_categories(&self, min: usize) -> Result<()> {
        if self.categories.len() < min {
            return Err(Error::validation(format!(
                "corpus '{}' has {} categor{}; at least {min} required",
                self.name,
                self.categories.len(),
                if self.categories.len() == 1 { "y" } else { "ies" }
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn per_category_cap(&self) -> Option<usize> {
        self.per_category_cap
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Index of each document's label within `categories`.
    pub fn label_indices(&self) -> Vec<usize> {
        let pos: HashMap<&str, usize> = self.categories.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
        self.documents.iter().map(|d| pos[d.label.as_str()]).collect()
    }

    /// Document count per category, aligned with `categories`.
    pub fn category_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.categories.len()];
        for l in self.label_indices() {
            sizes[l] += 1;
        }
        sizes
    }

    /// Order-invariant hash of the corpus content (names excluded).
    pub fn content_hash(&self) -> [u8; 32] {
        let mut hashes: Vec<[u8; 32]> = self.documents.iter().map(Document::content_hash).collect();
        hashes.sort_unstable();
        let mut h = Sha256::new();
        for d in &hashes {
            h.update(d);
        }
        h.finalize().into()
    }

    pub fn content_hash_hex(&self) -> String {
        hex::encode(self.content_hash())
    }

    /// The same corpus with documents sorted by (label, text) and categories
    /// sorted lexicographically. Everything that must be invariant to input
    /// order runs on this view.
    pub fn canonicalized(&self) -> LabeledCorpus {
        let mut documents = self.documents.clone();
        documents.sort_by(|a, b| (&a.label, &a.text).cmp(&(&b.label, &b.text)));
        let mut categories = self.categories.clone();
        categories.sort();
        LabeledCorpus { name: self.name.clone(), documents, categories, per_category_cap: self.per_category_cap }
    }

    /// Sub-corpus of the given document indices, keeping this corpus's
    /// category list so label indices stay aligned.
    pub fn subset(&self, indices: &[usize]) -> LabeledCorpus {
        LabeledCorpus {
            name: self.name.clone(),
            documents: indices.iter().map(|&i| self.documents[i].clone()).collect(),
            categories: self.categories.clone(),
            per_category_cap: self.per_category_cap,
        }
    }

    /// Applies a per-category cap, keeping the first `cap` documents of each
    /// category in document order.
    pub fn capped(&self, cap: usize) -> Result<LabeledCorpus> {
        if cap == 0 {
            return Err(Error::validation("per-category cap must be positive"));
        }
        let mut seen: HashMap<&str, usize> = HashMap::new();
        let documents = self
            .documents
            .iter()
            .filter(|d| {
                let n = seen.entry(d.label.as_str()).or_default();
                *n += 1;
                *n <= cap
            })
            .cloned()
            .collect();
        Ok(LabeledCorpus {
            name: self.name.clone(),
            documents,
            categories: self.categories.clone(),
            per_category_cap: Some(cap),
        })
    }

    /// Writes the corpus as JSON lines (`text`, `label`).
    pub fn save_jsonl(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        for d in &self.documents {
            serde_json::to_writer(&mut out, d)?;
            out.push(b'\n');
        }
        crate::io::write_atomic(path, &out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guesses the format from a file extension; JSON lines otherwise.
    pub fn from_path(path: &Path) -> CorpusFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

/// Loads a labeled corpus. The corpus is named after the file stem.
///
/// When a category exceeds `cap`, its first `cap` documents in file order
/// are kept.
pub fn load_corpus(path: &Path, format: CorpusFormat, cap: Option<usize>) -> Result<LabeledCorpus> {
    let records = match format {
        CorpusFormat::Jsonl => read_jsonl(path)?,
        CorpusFormat::Csv => read_csv(path)?,
    };
    if records.is_empty() {
        return Err(Error::validation(format!("{}: corpus file is empty", path.display())));
    }
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("corpus").to_owned();
    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut documents = Vec::with_capacity(records.len());
    for (line, doc) in records {
        doc.check().map_err(|m| Error::parse(Some(path.to_owned()), Some(line), m))?;
        let n = counts.entry(doc.label.clone()).or_default();
        *n += 1;
        if cap.is_some_and(|c| *n > c) {
            continue;
        }
        documents.push(doc);
    }
    let corpus = LabeledCorpus::from_parts(name, documents, cap)?;
    corpus.require_categories(2)?;
    Ok(corpus)
}

fn read_jsonl(path: &Path) -> Result<Vec<(usize, Document)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let perr = |m: String| Error::parse(Some(path.to_owned()), Some(line_no), m);
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| perr(format!("invalid JSON: {e}")))?;
        let obj = value.as_object().ok_or_else(|| perr("record is not a JSON object".into()))?;
        let field = |name: &str| -> Result<String> {
            match obj.get(name) {
                Some(serde_json::Value::String(s)) => Ok(s.clone()),
                Some(serde_json::Value::Number(n)) if name == "label" => Ok(n.to_string()),
                Some(_) => Err(perr(format!("field `{name}` is not a string"))),
                None => Err(perr(format!("missing field `{name}`"))),
            }
        };
        out.push((line_no, Document::new(field("text")?, field("label")?)));
    }
    Ok(out)
}

fn read_csv(path: &Path) -> Result<Vec<(usize, Document)>> {
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| Error::parse(Some(path.to_owned()), None, e.to_string()))?;
    let headers = reader.headers().map_err(|e| Error::parse(Some(path.to_owned()), Some(1), e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::parse(Some(path.to_owned()), Some(1), format!("missing column `{name}`")))
    };
    let (text_col, label_col) = (col("text")?, col("label")?);
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            Error::parse(Some(path.to_owned()), line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let get = |c: usize, name: &str| {
            rec.get(c)
                .map(str::to_owned)
                .ok_or_else(|| Error::parse(Some(path.to_owned()), Some(line), format!("missing field `{name}`")))
        };
        out.push((line, Document::new(get(text_col, "text")?, get(label_col, "label")?)));
    }
    Ok(out)
}

/// Token granularity of a [`TokenStream`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    Word,
    Char,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<String>,
    pub granularity: Granularity,
}

impl TokenStream {
    /// Word tokens that contain at least one alphanumeric character.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str).filter(|t| !is_punct_token(t))
    }
}

/// True when a token consists only of punctuation or symbols.
pub fn is_punct_token(token: &str) -> bool {
    !token.is_empty() && !token.chars().any(char::is_alphanumeric)
}

fn is_punct(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// Lowercases, splits on whitespace and detaches leading/trailing
/// punctuation runs as separate tokens.
pub fn tokenize_words(text: &str) -> TokenStream {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let chunk = chunk.to_lowercase();
        let start = chunk.find(|c: char| !is_punct(c));
        let Some(start) = start else {
            tokens.push(chunk);
            continue;
        };
        let end = chunk
            .char_indices()
            .rev()
            .find(|&(_, c)| !is_punct(c))
            .map(|(i, c)| i + c.len_utf8())
            .unwrap_or(chunk.len());
        if start > 0 {
            tokens.push(chunk[..start].to_owned());
        }
        tokens.push(chunk[start..end].to_owned());
        if end < chunk.len() {
            tokens.push(chunk[end..].to_owned());
        }
    }
    TokenStream { tokens, granularity: Granularity::Word }
}

/// Character stream of the given words joined by single spaces.
pub fn char_tokens<'a>(words: impl IntoIterator<Item = &'a str>) -> TokenStream {
    let mut tokens = Vec::new();
    for (i, w) in words.into_iter().enumerate() {
        if i > 0 {
            tokens.push(" ".to_owned());
        }
        tokens.extend(w.chars().map(String::from));
    }
    TokenStream { tokens, granularity: Granularity::Char }
}

/// Splits text after `.`, `!` or `?` when followed by whitespace or the end
/// of the text. Non-empty text always yields at least one sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if matches!(c, '.' | '!' | '?') {
            let boundary = match iter.peek() {
                None => true,
                Some(&(_, next)) => next.is_whitespace(),
            };
            if boundary {
                let end = i + c.len_utf8();
                let s = text[start..end].trim();
                if !s.is_empty() {
                    out.push(s.to_owned());
                }
                start = end;
            }
        }
    }
    let rest = text[start..].trim();
    if !rest.is_empty() {
        out.push(rest.to_owned());
    }
    out
}

/// Term ↔ index mapping with corpus frequencies.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
    freqs: Vec<u64>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Keeps the `cap` most frequent terms (ties broken lexicographically)
    /// and numbers the survivors in lexicographic order.
    pub fn from_counts(counts: HashMap<String, u64>, cap: Option<usize>) -> Vocabulary {
        let mut entries: Vec<(String, u64)> = counts.into_iter().filter(|(_, f)| *f > 0).collect();
        if let Some(cap) = cap {
            if entries.len() > cap {
                entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
                entries.truncate(cap);
            }
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let index = entries.iter().enumerate().map(|(i, (t, _))| (t.clone(), i)).collect();
        let (terms, freqs) = entries.into_iter().unzip();
        Vocabulary { terms, freqs, index }
    }

    pub fn from_tokens<'a>(tokens: impl IntoIterator<Item = &'a str>, cap: Option<usize>) -> Vocabulary {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for t in tokens {
            *counts.entry(t.to_owned()).or_default() += 1;
        }
        Vocabulary::from_counts(counts, cap)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.freqs
    }
}

/// A train/test partition of document indices (each sorted ascending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-category document indices in content-hash order, each category then
/// permuted by a generator seeded from `(seed, corpus hash, label)`.
fn shuffled_categories(corpus: &LabeledCorpus, seed: u64, stream: &[u8]) -> BTreeMap<String, Vec<usize>> {
    let corpus_hash = corpus.content_hash();
    let hashes: Vec<[u8; 32]> = corpus.documents.iter().map(Document::content_hash).collect();
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, d) in corpus.documents.iter().enumerate() {
        groups.entry(d.label.clone()).or_default().push(i);
    }
    for (label, idx) in groups.iter_mut() {
        idx.sort_by(|&a, &b| hashes[a].cmp(&hashes[b]).then(a.cmp(&b)));
        let mut rng = rng_for(seed, &[stream, &corpus_hash, label.as_bytes()]);
        idx.shuffle(&mut rng);
    }
    groups
}

/// Stratified train/test split. Each category contributes
/// `ceil(train_fraction * n_c)` documents to train, clamped so both sides
/// receive at least one.
pub fn stratified_split(corpus: &LabeledCorpus, train_fraction: f64, seed: u64) -> Result<Split> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::validation(format!("train fraction must lie in (0,1), got {train_fraction}")));
    }
    let groups = shuffled_categories(corpus, seed, b"split");
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (label, idx) in groups {
        let n = idx.len();
        if n < 2 {
            return Err(Error::validation(format!(
                "category '{label}' has {n} document; a stratified split needs at least 2"
            )));
        }
        let n_train = ((train_fraction * n as f64 - 1e-9).ceil() as usize).clamp(1, n - 1);
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

/// Stratified k-fold partition; fold `f` is the test side of the `f`-th split.
pub fn stratified_kfold(corpus: &LabeledCorpus, k: usize, seed: u64) -> Result<Vec<Split>> {
    if k < 2 {
        return Err(Error::validation(format!("k-fold needs k >= 2, got {k}")));
    }
    let groups = shuffled_categories(corpus, seed, b"kfold");
    let mut fold_of = vec![0usize; corpus.len()];
    let mut offset = 0usize;
    for (label, idx) in groups {
        if idx.len() < k {
            return Err(Error::validation(format!(
                "category '{label}' has {} documents, fewer than k = {k}",
                idx.len()
            )));
        }
        for (j, &i) in idx.iter().enumerate() {
            fold_of[i] = (offset + j) % k;
        }
        offset += idx.len();
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..corpus.len()).partition(|&i| fold_of[i] == f);
            Split { train, test }
        })
        .collect())
}
