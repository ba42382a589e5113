//! Label normalization and tokenization shared by the ontology index and the classifiers.

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

/// Lowercase, NFC, trim and collapse internal whitespace runs to one space.
/// Hyphens and other punctuation are kept.
pub fn normalize_label(s: &str) -> String {
    let nfc: String = s.nfc().collect();
    let mut out = String::with_capacity(nfc.len());
    for word in nfc.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    // lowercasing can denormalize a handful of code points
    out.nfc().collect()
}

/// Collapse whitespace runs without changing case.
pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Half-open range of character (Unicode scalar) offsets into a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// A lowercased word with its position in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub span: Span,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '-'
}

fn is_sentence_end(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Split text into sentences of lowercased tokens. Tokens are maximal runs of
/// letters, digits and hyphens; `.`, `!` and `?` end a sentence.
pub fn sentences(text: &str) -> Vec<Vec<Token>> {
    let mut out = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let mut word = String::new();
    let mut word_start = 0usize;
    let mut pos = 0usize;

    let flush_word = |word: &mut String, start: usize, end: usize, current: &mut Vec<Token>| {
        let trimmed = word.trim_matches('-');
        if !trimmed.is_empty() {
            // keep span on the trimmed text
            let lead = word.chars().take_while(|&c| c == '-').count();
            let tail = word.chars().rev().take_while(|&c| c == '-').count();
            current.push(Token {
                text: trimmed.chars().flat_map(char::to_lowercase).collect(),
                span: Span::new(start + lead, end - tail),
            });
        }
        word.clear();
    };

    for c in text.chars() {
        if is_word_char(c) {
            if word.is_empty() {
                word_start = pos;
            }
            word.push(c);
        } else {
            if !word.is_empty() {
                flush_word(&mut word, word_start, pos, &mut current);
            }
            if is_sentence_end(c) && !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
        }
        pos += 1;
    }
    if !word.is_empty() {
        flush_word(&mut word, word_start, pos, &mut current);
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// Substring of `text` selected by a character span.
pub fn slice_chars(text: &str, span: Span) -> String {
    text.chars()
        .skip(span.start)
        .take(span.end.saturating_sub(span.start))
        .collect()
}

/// Default English stopword list.
pub const ENGLISH_STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any",
    "are", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "either",
    "few", "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers",
    "herself", "him", "himself", "his", "how", "however", "i", "if", "in", "into", "is", "it",
    "its", "itself", "just", "may", "me", "might", "more", "most", "must", "my", "myself", "no",
    "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other", "our", "ours",
    "ourselves", "out", "over", "own", "per", "same", "she", "should", "so", "some", "such",
    "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there", "these",
    "they", "this", "those", "through", "thus", "to", "too", "under", "until", "up", "upon",
    "us", "very", "via", "was", "we", "were", "what", "when", "where", "whether", "which",
    "while", "who", "whom", "why", "will", "with", "within", "without", "would", "you", "your",
    "yours", "yourself", "yourselves",
];
