//! Part-of-speech tagging reduced to the three classes candidate-term chunking needs.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::ngrams::{ngrams_of_run, Ngram};
use crate::text::{sentences, Token, ENGLISH_STOPWORDS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PosTag {
    Adjective,
    Noun,
    Other,
}

#[derive(Debug, thiserror::Error)]
#[error("tagger failed: {0}")]
pub struct TaggerError(pub String);

pub trait Tagger: Send + Sync {
    /// One tag per input token (tokens are already lowercased).
    fn tag(&self, tokens: &[&str]) -> Result<Vec<PosTag>, TaggerError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaggerKind {
    #[default]
    Lexicon,
    Whitespace,
}

impl TaggerKind {
    pub fn build(self, stopwords: &HashSet<String>) -> Box<dyn Tagger> {
        match self {
            TaggerKind::Lexicon => Box::new(LexiconTagger::new(stopwords.iter().cloned())),
            TaggerKind::Whitespace => Box::new(WhitespaceChunker::new(stopwords.iter().cloned())),
        }
    }
}

const VERBS: &[&str] = &[
    "achieve", "achieves", "address", "addresses", "allow", "allows", "analyse", "analyses",
    "analyze", "apply", "applies", "build", "builds", "compare", "compares", "consider",
    "considers", "demonstrate", "demonstrates", "describe", "describes", "design", "discuss",
    "discusses", "enable", "enables", "evaluate", "evaluates", "explore", "explores", "find",
    "finds", "focus", "focuses", "help", "helps", "identify", "identifies", "improve",
    "improves", "include", "includes", "introduce", "introduces", "investigate",
    "investigates", "learn", "learns", "make", "makes", "obtain", "obtains", "outperform",
    "outperforms", "perform", "performs", "present", "presents", "propose", "proposes",
    "provide", "provides", "reduce", "reduces", "report", "reports", "require", "requires",
    "show", "shows", "study", "studies", "suggest", "suggests", "support", "supports", "use",
    "uses", "yield", "yields", "get", "gets", "take", "takes", "give", "gives", "become",
    "becomes", "remain", "remains", "exist", "exists", "allowing", "using", "based",
];

const ADJECTIVES: &[&str] = &[
    "deep", "new", "novel", "large", "small", "high", "low", "big", "good", "best", "better",
    "fast", "open", "smart", "online", "real", "full", "main", "key", "wide", "short", "long",
    "hard", "soft", "common", "recent", "modern", "robust", "efficient", "several", "many",
    "various", "different", "multiple", "complex", "simple", "linked", "social", "neural",
    "semantic", "natural", "mobile", "wireless", "distributed", "public", "private",
];

const ADJECTIVE_SUFFIXES: &[&str] = &[
    "al", "ial", "ive", "ous", "ic", "ical", "able", "ible", "ful", "less", "ary", "ed",
];

fn strip_plural(word: &str) -> &str {
    word.strip_suffix('s').unwrap_or(word)
}

/// Closed-class lexicon plus suffix heuristics; unknown words default to nouns.
#[derive(Debug, Clone)]
pub struct LexiconTagger {
    function_words: HashSet<String>,
    verbs: HashSet<&'static str>,
    adjectives: HashSet<&'static str>,
}

impl LexiconTagger {
    pub fn new(function_words: impl IntoIterator<Item = String>) -> Self {
        LexiconTagger {
            function_words: function_words.into_iter().collect(),
            verbs: VERBS.iter().copied().collect(),
            adjectives: ADJECTIVES.iter().copied().collect(),
        }
    }

    fn tag_word(&self, word: &str) -> PosTag {
        if self.function_words.contains(word) || self.verbs.contains(word) {
            return PosTag::Other;
        }
        if word.chars().all(|c| c.is_ascii_digit()) {
            return PosTag::Other;
        }
        if self.adjectives.contains(word) {
            return PosTag::Adjective;
        }
        if word.len() > 4 && word.ends_with("ly") {
            return PosTag::Other;
        }
        // plural nouns such as "proposals" or "analytics" keep their noun reading
        if word.ends_with('s') && !word.ends_with("ous") && !word.ends_with("ss") {
            return PosTag::Noun;
        }
        let stem = strip_plural(word);
        if stem.len() > 4 && ADJECTIVE_SUFFIXES.iter().any(|s| stem.ends_with(s)) {
            return PosTag::Adjective;
        }
        PosTag::Noun
    }
}

impl Default for LexiconTagger {
    fn default() -> Self {
        LexiconTagger::new(ENGLISH_STOPWORDS.iter().map(|s| s.to_string()))
    }
}

impl Tagger for LexiconTagger {
    fn tag(&self, tokens: &[&str]) -> Result<Vec<PosTag>, TaggerError> {
        Ok(tokens.iter().map(|t| self.tag_word(t)).collect())
    }
}

/// Fallback: stopwords are OTHER, everything else NOUN, so chunks are stopword-delimited runs.
#[derive(Debug, Clone)]
pub struct WhitespaceChunker {
    stopwords: HashSet<String>,
}

impl WhitespaceChunker {
    pub fn new(stopwords: impl IntoIterator<Item = String>) -> Self {
        WhitespaceChunker { stopwords: stopwords.into_iter().collect() }
    }
}

impl Tagger for WhitespaceChunker {
    fn tag(&self, tokens: &[&str]) -> Result<Vec<PosTag>, TaggerError> {
        Ok(tokens
            .iter()
            .map(|t| if self.stopwords.contains(*t) { PosTag::Other } else { PosTag::Noun })
            .collect())
    }
}

/// A candidate term: a maximal `ADJ* NOUN+` run of tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub tokens: Vec<Token>,
}

impl Chunk {
    pub fn words(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    /// Decompose into unigrams, bigrams and trigrams.
    pub fn ngrams(&self) -> Vec<Ngram> {
        let mut out = Vec::new();
        ngrams_of_run(&self.tokens, &mut out);
        out
    }
}

/// Leftmost-longest matches of `ADJ* NOUN+` over a tag sequence, as `[start, end)` ranges.
pub fn chunk_ranges(tags: &[PosTag]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tags.len() {
        if tags[i] == PosTag::Other {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < tags.len() && tags[j] == PosTag::Adjective {
            j += 1;
        }
        if j < tags.len() && tags[j] == PosTag::Noun {
            while j < tags.len() && tags[j] == PosTag::Noun {
                j += 1;
            }
            out.push((i, j));
            i = j;
        } else {
            // no start inside an adjective run that fails can succeed either
            i = j.max(i + 1);
        }
    }
    out
}

pub fn extract_candidate_terms(text: &str, tagger: &dyn Tagger) -> Result<Vec<Chunk>, TaggerError> {
    let mut chunks = Vec::new();
    for sentence in sentences(text) {
        let words: Vec<&str> = sentence.iter().map(|t| t.text.as_str()).collect();
        let tags = tagger.tag(&words)?;
        if tags.len() != words.len() {
            return Err(TaggerError(format!("{} tags for {} tokens", tags.len(), words.len())));
        }
        for (s, e) in chunk_ranges(&tags) {
            chunks.push(Chunk { tokens: sentence[s..e].to_vec() });
        }
    }
    Ok(chunks)
}
