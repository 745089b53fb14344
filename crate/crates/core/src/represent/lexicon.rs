use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::write_atomic;

/// Named word categories, e.g. positive / negative emotion words.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryLexicon {
    categories: Vec<(String, HashSet<String>)>,
}

impl CategoryLexicon {
    pub fn new(categories: Vec<(String, Vec<String>)>) -> Result<Self> {
        if categories.is_empty() {
            return Err(Error::validation("lexicon has no categories"));
        }
        let mut names = HashSet::new();
        let mut out = Vec::with_capacity(categories.len());
        for (name, words) in categories {
            if !names.insert(name.clone()) {
                return Err(Error::validation(format!("duplicate lexicon category {name:?}")));
            }
            out.push((name, words.into_iter().map(|w| w.to_lowercase()).collect()));
        }
        Ok(CategoryLexicon { categories: out })
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn category_names(&self) -> Vec<String> {
        self.categories.iter().map(|(n, _)| n.clone()).collect()
    }
}

/// Reads a lexicon with one category per line: `name: word word ...`.
/// Blank lines and lines starting with `#` are skipped.
pub fn load_lexicon(path: &Path) -> Result<CategoryLexicon> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cats = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, words) = line
            .split_once(':')
            .ok_or_else(|| Error::parse(Some(path.to_owned()), Some(i + 1), "expected `category: word word ...`"))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::parse(Some(path.to_owned()), Some(i + 1), "empty category name"));
        }
        cats.push((name.to_owned(), words.split_whitespace().map(str::to_owned).collect()));
    }
    CategoryLexicon::new(cats)
}

/// Writes the lexicon in the format read by [`load_lexicon`], words sorted.
pub fn save_lexicon(lexicon: &CategoryLexicon, path: &Path) -> Result<()> {
    let mut text = String::new();
    for (name, words) in &lexicon.categories {
        let mut words: Vec<&str> = words.iter().map(String::as_str).collect();
        words.sort_unstable();
        text.push_str(&format!("{name}: {}\n", words.join(" ")));
    }
    write_atomic(path, text.as_bytes())
}

/// Fraction of the document's tokens in each category. Empty documents map
/// to the zero vector.
pub fn lexicon_features(tokens: &[String], lexicon: &CategoryLexicon) -> Vec<f64> {
    let n = tokens.len();
    lexicon
        .categories
        .iter()
        .map(
            |(_, words)| {
                if n == 0 {
                    0.0
                } else {
                    tokens.iter().filter(|t| words.contains(t.as_str())).count() as f64 / n as f64
                }
            },
        )
        .collect()
}
