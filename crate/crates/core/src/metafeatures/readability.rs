//! Per-document readability formulas.

use serde::{Deserialize, Serialize};

use crate::corpus::{is_punct_token, split_sentences, tokenize_words};
use crate::data::dale_chall_easy_words;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Readability {
    pub flesch_reading_ease: f64,
    pub smog_index: f64,
    pub flesch_kincaid_grade: f64,
    pub coleman_liau_index: f64,
    pub automated_readability_index: f64,
    pub dale_chall_score: f64,
    pub difficult_words: f64,
    pub linsear_write: f64,
    pub gunning_fog: f64,
    pub text_standard: f64,
}

impl Readability {
    /// Values in canonical meta-feature order.
    pub fn to_array(&self) -> [f64; 10] {
        [
            self.flesch_reading_ease,
            self.smog_index,
            self.flesch_kincaid_grade,
            self.coleman_liau_index,
            self.automated_readability_index,
            self.dale_chall_score,
            self.difficult_words,
            self.linsear_write,
            self.gunning_fog,
            self.text_standard,
        ]
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel-group syllable estimate: maximal runs of [aeiouy], minus a silent
/// trailing `e` after a consonant, at least 1.
pub fn syllables(word: &str) -> usize {
    let chars: Vec<char> = word.to_lowercase().chars().filter(|c| c.is_alphabetic()).collect();
    let mut runs = 0usize;
    let mut prev = false;
    for &c in &chars {
        let v = is_vowel(c);
        if v && !prev {
            runs += 1;
        }
        prev = v;
    }
    let n = chars.len();
    if n >= 2 && chars[n - 1] == 'e' && !is_vowel(chars[n - 2]) {
        runs = runs.saturating_sub(1);
    }
    runs.max(1)
}

/// The ten readability scores of one text. Fails on text without any word.
pub fn readability(text: &str) -> Result<Readability> {
    let words: Vec<String> = tokenize_words(text).tokens.into_iter().filter(|t| !is_punct_token(t)).collect();
    if words.is_empty() {
        return Err(Error::validation("readability of a text without words"));
    }
    let sentences = split_sentences(text);
    let n_sent = sentences.len().max(1) as f64;
    let n_words = words.len() as f64;
    let syl: Vec<usize> = words.iter().map(|w| syllables(w)).collect();
    let n_syl = syl.iter().sum::<usize>() as f64;
    let letters = words.iter().map(|w| w.chars().filter(|c| c.is_alphanumeric()).count()).sum::<usize>() as f64;
    let poly = syl.iter().filter(|&&s| s >= 3).count() as f64;
    let easy = dale_chall_easy_words();
    let not_easy = words.iter().filter(|w| !easy.contains(w.as_str())).count() as f64;
    let difficult = words.iter().zip(&syl).filter(|(w, &s)| s >= 2 && !easy.contains(w.as_str())).count() as f64;

    let wps = n_words / n_sent;
    let spw = n_syl / n_words;
    let flesch_reading_ease = 206.835 - 1.015 * wps - 84.6 * spw;
    let flesch_kincaid_grade = 0.39 * wps + 11.8 * spw - 15.59;
    let smog_index = 1.043 * (30.0 * poly / n_sent).sqrt() + 3.1291;
    let l = letters / n_words * 100.0;
    let s = n_sent / n_words * 100.0;
    let coleman_liau_index = 0.0588 * l - 0.296 * s - 15.8;
    let automated_readability_index = 4.71 * letters / n_words + 0.5 * wps - 21.43;
    let pct_difficult = 100.0 * not_easy / n_words;
    let mut dale_chall_score = 0.1579 * pct_difficult + 0.0496 * wps;
    if pct_difficult > 5.0 {
        dale_chall_score += 3.6365;
    }
    let linsear_write = linsear(&sentences, &syl);
    let gunning_fog = 0.4 * (wps + 100.0 * poly / n_words);
    let text_standard = consensus_grade(&[
        flesch_kincaid_grade,
        smog_index,
        coleman_liau_index,
        automated_readability_index,
        dale_chall_score,
        linsear_write,
        gunning_fog,
    ]);
    Ok(Readability {
        flesch_reading_ease,
        smog_index,
        flesch_kincaid_grade,
        coleman_liau_index,
        automated_readability_index,
        dale_chall_score,
        difficult_words: difficult,
        linsear_write,
        gunning_fog,
        text_standard,
    })
}

/// Linsear Write over the first 100 words: easy words (< 3 syllables)
/// score 1, hard words 3, divided by the sentences those words span.
fn linsear(sentences: &[String], syl: &[usize]) -> f64 {
    let take = syl.len().min(100);
    let score: f64 = syl[..take].iter().map(|&s| if s >= 3 { 3.0 } else { 1.0 }).sum();
    let mut covered = 0usize;
    let mut spanned = 0usize;
    for s in sentences {
        if covered >= take {
            break;
        }
        let w = tokenize_words(s).words().count();
        if w == 0 {
            continue;
        }
        covered += w;
        spanned += 1;
    }
    let r = score / spanned.max(1) as f64;
    if r > 20.0 {
        r / 2.0
    } else {
        (r - 2.0) / 2.0
    }
}

/// Mode of the rounded grade scores; ties go to the lower grade.
fn consensus_grade(grades: &[f64]) -> f64 {
    let mut rounded: Vec<i64> = grades.iter().map(|g| g.round() as i64).collect();
    rounded.sort_unstable();
    let (mut best, mut best_n) = (rounded[0], 0);
    let mut i = 0;
    while i < rounded.len() {
        let j = rounded[i..].iter().take_while(|&&v| v == rounded[i]).count();
        if j > best_n {
            best = rounded[i];
            best_n = j;
        }
        i += j;
    }
    best as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syllable_heuristic() {
        assert_eq!(syllables("the"), 1);
        assert_eq!(syllables("cat"), 1);
        assert_eq!(syllables("a"), 1);
        assert_eq!(syllables("beautiful"), 3);
        assert_eq!(syllables("make"), 1);
        assert_eq!(syllables("see"), 1);
        assert_eq!(syllables("rhythm"), 1);
        assert_eq!(syllables("1999"), 1);
    }

    #[test]
    fn cat_sat_on_the_mat() {
        let r = readability("The cat sat on the mat.").unwrap();
        // 6 words, 1 sentence, 6 syllables
        assert!((r.flesch_reading_ease - (206.835 - 1.015 * 6.0 - 84.6)).abs() < 1e-9);
        assert!((r.flesch_reading_ease - 116.145).abs() < 1e-9);
        // 0.39·6 + 11.8·1 − 15.59
        assert!((r.flesch_kincaid_grade - (-1.45)).abs() < 1e-9);
        assert!((r.gunning_fog - 2.4).abs() < 1e-9);
        assert_eq!(r.difficult_words, 0.0);
    }

    #[test]
    fn single_word_is_finite() {
        let r = readability("a").unwrap();
        assert!(r.to_array().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn empty_text_is_rejected() {
        assert!(readability("").is_err());
        assert!(readability(" ... !").is_err());
    }

    #[test]
    fn consensus_prefers_lower_grade_on_ties() {
        assert_eq!(consensus_grade(&[3.2, 3.4, 5.0, 5.1, 9.0]), 3.0);
        assert_eq!(consensus_grade(&[7.0, 7.4, 6.6, 2.0]), 7.0);
    }

    #[test]
    fn linsear_branches() {
        // 10 one-syllable words in 1 sentence: r = 10, so (10 - 2) / 2
        let r = readability("one two six ten red big cat dog sun hat.").unwrap();
        assert!((r.linsear_write - 4.0).abs() < 1e-12);
    }
}
