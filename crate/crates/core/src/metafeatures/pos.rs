//! Lexicon-based part-of-speech profile.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::corpus::{is_punct_token, tokenize_words, LabeledCorpus};
use crate::error::{Error, Result};
use crate::seed::sha256_hex;

/// Universal part-of-speech tags, in meta-feature order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PosTag {
    Adj,
    Adp,
    Adv,
    Conj,
    Det,
    Noun,
    Num,
    Prt,
    Pron,
    Verb,
    Punct,
}

impl PosTag {
    pub const ALL: [PosTag; 11] = [
        PosTag::Adj,
        PosTag::Adp,
        PosTag::Adv,
        PosTag::Conj,
        PosTag::Det,
        PosTag::Noun,
        PosTag::Num,
        PosTag::Prt,
        PosTag::Pron,
        PosTag::Verb,
        PosTag::Punct,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for PosTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "ADJ" => PosTag::Adj,
            "ADP" => PosTag::Adp,
            "ADV" => PosTag::Adv,
            "CONJ" => PosTag::Conj,
            "DET" => PosTag::Det,
            "NOUN" => PosTag::Noun,
            "NUM" => PosTag::Num,
            "PRT" => PosTag::Prt,
            "PRON" => PosTag::Pron,
            "VERB" => PosTag::Verb,
            "PUNCT" | "." => PosTag::Punct,
            other => return Err(format!("unknown tag {other:?}")),
        })
    }
}

/// Word → most frequent tag.
#[derive(Debug, Clone, PartialEq)]
pub struct PosLexicon {
    tags: HashMap<String, PosTag>,
    hash: String,
}

impl PosLexicon {
    /// Builds a lexicon; later entries for the same word win.
    pub fn from_entries(entries: impl IntoIterator<Item = (String, PosTag)>) -> Result<Self> {
        let tags: HashMap<String, PosTag> = entries.into_iter().map(|(w, t)| (w.to_lowercase(), t)).collect();
        if tags.is_empty() {
            return Err(Error::validation("POS lexicon is empty"));
        }
        let mut sorted: Vec<(&String, &PosTag)> = tags.iter().collect();
        sorted.sort();
        let mut buf = String::new();
        for (w, t) in sorted {
            buf.push_str(&format!("{w}\t{t:?}\n"));
        }
        Ok(PosLexicon { hash: sha256_hex(buf.as_bytes()), tags })
    }

    /// Parses `word<TAB>TAG` lines; `#` lines are comments.
    pub fn parse(src: &str, path: Option<&Path>) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in src.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |m: String| Error::parse(path.map(Path::to_owned), Some(i + 1), m);
            let (word, tag) = line.split_once('\t').ok_or_else(|| perr("expected `word<TAB>TAG`".into()))?;
            entries.push((word.to_owned(), tag.trim().parse::<PosTag>().map_err(perr)?));
        }
        Self::from_entries(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src, Some(path))
    }

    /// The lexicon shipped with the crate.
    pub fn bundled() -> Arc<PosLexicon> {
        static LEX: OnceLock<Arc<PosLexicon>> = OnceLock::new();
        LEX.get_or_init(|| {
            Arc::new(PosLexicon::parse(crate::data::pos_lexicon_source(), None).expect("bundled POS lexicon parses"))
        })
        .clone()
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tag(&self, word: &str) -> Option<PosTag> {
        self.tags.get(word).copied()
    }

    /// Content hash of the normalized entries.
    pub fn content_hash(&self) -> &str {
        &self.hash
    }
}

/// Per-document tag fractions, macro-averaged: 11 tags then `untagged`.
/// Punctuation tokens are PUNCT by rule. Documents without tokens are
/// skipped; a corpus with no tokens at all is entirely untagged.
pub fn pos_profile(corpus: &LabeledCorpus, lexicon: &PosLexicon) -> [f64; 12] {
    let mut acc = [0.0; 12];
    let mut docs = 0usize;
    for d in corpus.documents() {
        let tokens = tokenize_words(&d.text).tokens;
        if tokens.is_empty() {
            continue;
        }
        let mut counts = [0usize; 12];
        for t in &tokens {
            let slot = if is_punct_token(t) { PosTag::Punct.index() } else { lexicon.tag(t).map_or(11, PosTag::index) };
            counts[slot] += 1;
        }
        let n = tokens.len() as f64;
        for (a, c) in acc.iter_mut().zip(counts) {
            *a += c as f64 / n;
        }
        docs += 1;
    }
    if docs == 0 {
        let mut out = [0.0; 12];
        out[11] = 1.0;
        return out;
    }
    acc.map(|a| a / docs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn one_doc(text: &str) -> LabeledCorpus {
        LabeledCorpus::new_unchecked_categories("t", vec![Document::new(text, "a")]).unwrap()
    }

    #[test]
    fn counting_example() {
        let lex = PosLexicon::from_entries([("cat".into(), PosTag::Noun), ("sat".into(), PosTag::Verb)]).unwrap();
        let p = pos_profile(&one_doc("the cat sat ."), &lex);
        assert_eq!(p[PosTag::Noun.index()], 0.25);
        assert_eq!(p[PosTag::Verb.index()], 0.25);
        assert_eq!(p[PosTag::Punct.index()], 0.25);
        assert_eq!(p[11], 0.25);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_words_are_untagged() {
        let lex = PosLexicon::from_entries([("cat".into(), PosTag::Noun)]).unwrap();
        assert_eq!(pos_profile(&one_doc("zorp blick"), &lex)[11], 1.0);
    }

    #[test]
    fn empty_lexicon_rejected() {
        assert!(PosLexicon::from_entries(Vec::new()).is_err());
        assert!(PosLexicon::parse("# only a comment\n", None).is_err());
        assert!(PosLexicon::parse("word\tBOGUS\n", None).is_err());
    }

    #[test]
    fn bundled_lexicon_covers_common_words() {
        let lex = PosLexicon::bundled();
        assert!(lex.len() > 50_000);
        assert_eq!(lex.tag("the"), Some(PosTag::Det));
        assert_eq!(lex.tag("dog"), Some(PosTag::Noun));
    }
}
