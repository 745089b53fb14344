//! Bundled data files: English stopwords, the Dale–Chall easy-word list, a
//! part-of-speech lexicon and the canonical meta-feature names.
//!
//! Every file is content-hashed so knowledge bases can record exactly which
//! resources produced them.

use std::collections::{BTreeMap, HashSet};
use std::sync::OnceLock;

use crate::seed::sha256_hex;

const STOPWORDS_EN: &str = include_str!("../data/stopwords_en.txt");
const DALE_CHALL_EASY: &str = include_str!("../data/dale_chall_easy.txt");
const POS_LEXICON_EN: &str = include_str!("../data/pos_lexicon_en.txt");
const METAFEATURE_NAMES_V1: &str = include_str!("../data/metafeature_names_v1.txt");

/// Version tag of the canonical meta-feature name list.
pub const METAFEATURE_NAMES_VERSION: &str = "v1";

fn lines(src: &str) -> impl Iterator<Item = &str> {
    src.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// The 318-word English stopword list.
pub fn english_stopwords() -> &'static HashSet<String> {
    static SET: OnceLock<HashSet<String>> = OnceLock::new();
    SET.get_or_init(|| lines(STOPWORDS_EN).map(str::to_owned).collect())
}

/// Stopwords in sorted order; used where a stable feature order matters.
pub fn english_stopwords_sorted() -> &'static [String] {
    static LIST: OnceLock<Vec<String>> = OnceLock::new();
    LIST.get_or_init(|| {
        let mut v: Vec<String> = lines(STOPWORDS_EN).map(str::to_owned).collect();
        v.sort();
        v.dedup();
        v
    })
}

/// Dale–Chall list of words familiar to fourth-grade readers.
pub fn dale_chall_easy_words() -> &'static HashSet<String> {
    static SET: OnceLock<HashSet<String>> = OnceLock::new();
    SET.get_or_init(|| lines(DALE_CHALL_EASY).map(str::to_owned).collect())
}

pub(crate) fn pos_lexicon_source() -> &'static str {
    POS_LEXICON_EN
}

/// The 72 canonical meta-feature names in canonical order.
pub fn metafeature_names() -> &'static [String] {
    static NAMES: OnceLock<Vec<String>> = OnceLock::new();
    NAMES.get_or_init(|| lines(METAFEATURE_NAMES_V1).map(str::to_owned).collect())
}

/// Content hashes of all bundled files, keyed by file name.
pub fn data_file_hashes() -> BTreeMap<String, String> {
    static HASHES: OnceLock<BTreeMap<String, String>> = OnceLock::new();
    HASHES
        .get_or_init(|| {
            [
                ("stopwords_en.txt", STOPWORDS_EN),
                ("dale_chall_easy.txt", DALE_CHALL_EASY),
                ("pos_lexicon_en.txt", POS_LEXICON_EN),
                ("metafeature_names_v1.txt", METAFEATURE_NAMES_V1),
            ]
            .into_iter()
            .map(|(n, src)| (n.to_owned(), sha256_hex(src.as_bytes())))
            .collect()
        })
        .clone()
}

/// Hash of the stopword list alone; folded into the registry fingerprint.
pub fn stopwords_hash() -> String {
    sha256_hex(STOPWORDS_EN.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_sizes() {
        assert_eq!(english_stopwords().len(), 318);
        assert_eq!(english_stopwords_sorted().len(), 318);
        assert!(dale_chall_easy_words().len() > 2900);
        assert_eq!(metafeature_names().len(), 72);
        assert!(english_stopwords().contains("the"));
        assert!(dale_chall_easy_words().contains("cat"));
    }

    #[test]
    fn names_are_unique() {
        let set: HashSet<&String> = metafeature_names().iter().collect();
        assert_eq!(set.len(), 72);
    }
}
