use std::collections::HashSet;

use crate::text::{sentences, Span, Token};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ngram {
    pub tokens: Vec<String>,
    pub span: Span,
}

impl Ngram {
    /// Space-joined form used for matching and as the excerpt key.
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// All 1-, 2- and 3-grams of `run`, ordered by start position then length.
pub(crate) fn ngrams_of_run(run: &[Token], out: &mut Vec<Ngram>) {
    for start in 0..run.len() {
        for n in 1..=3usize {
            if start + n > run.len() {
                break;
            }
            let window = &run[start..start + n];
            out.push(Ngram {
                tokens: window.iter().map(|t| t.text.clone()).collect(),
                span: Span::new(window[0].span.start, window[n - 1].span.end),
            });
        }
    }
}

/// Unigrams, bigrams and trigrams over runs of adjacent non-stopword tokens.
/// Stopwords and sentence ends both break adjacency.
pub fn extract_ngrams(text: &str, stopwords: &HashSet<String>) -> Vec<Ngram> {
    let mut out = Vec::new();
    for sentence in sentences(text) {
        let mut run: Vec<Token> = Vec::new();
        for tok in sentence {
            if stopwords.contains(&tok.text) {
                ngrams_of_run(&run, &mut out);
                run.clear();
            } else {
                run.push(tok);
            }
        }
        ngrams_of_run(&run, &mut out);
    }
    out
}
