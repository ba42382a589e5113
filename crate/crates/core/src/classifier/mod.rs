//! Topic detection for chapters.
//!
//! Two detectors run over title, abstract and keywords:
//!
//! * the syntactic module compares every 1–3-gram with every ontology label
//!   using normalized Levenshtein similarity;
//! * the semantic module looks up embedding neighbours of candidate noun
//!   phrases and maps neighbour tokens back to ontology labels, ranking topics
//!   by frequency × diversity and cutting the ranking at its elbow.
//!
//! Their union is then enriched with every super-topic in the hierarchy.

mod elbow;
mod levenshtein;
mod ngrams;
mod semantic;
mod syntactic;
mod tagger;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use elbow::{elbow_select, knee_cut};
pub use levenshtein::{edit_distance, levenshtein_sim, similarity_chars};
pub use ngrams::{extract_ngrams, Ngram};
pub use semantic::{SemanticEvent, SemanticScore};
pub use tagger::{
    chunk_ranges, extract_candidate_terms, Chunk, LexiconTagger, PosTag, Tagger, TaggerError, TaggerKind,
    WhitespaceChunker,
};

use crate::embeddings::EmbeddingModel;
use crate::ingest::{Book, Chapter};
use crate::ontology::{Ontology, TopicId};
use crate::text::{Span, ENGLISH_STOPWORDS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Syntactic,
    Semantic,
    Enhanced,
}

/// Chapter field a trigger came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Field {
    Title,
    Abstract,
    /// Index into the chapter's keyword list.
    Keyword(usize),
}

/// One piece of text that triggered a topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Source {
    pub ngram: String,
    pub chapter_id: String,
    pub field: Field,
    pub span: Span,
    pub origin: Origin,
    /// Ontology label (syntactic) or embedding neighbour label (semantic).
    pub matched_label: String,
    /// Levenshtein similarity for syntactic triggers, topic relevance for semantic ones.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub topic: TopicId,
    pub sources: Vec<Source>,
}

impl Evidence {
    pub fn new(topic: TopicId) -> Self {
        Evidence { topic, sources: Vec::new() }
    }

    pub fn origins(&self) -> BTreeSet<Origin> {
        self.sources.iter().map(|s| s.origin).collect()
    }

    pub fn is_enhanced_only(&self) -> bool {
        self.sources.iter().all(|s| s.origin == Origin::Enhanced)
    }
}

pub type TopicEvidence = BTreeMap<TopicId, Evidence>;

fn merge_into(target: &mut TopicEvidence, other: TopicEvidence) {
    for (topic, ev) in other {
        target
            .entry(topic)
            .or_insert_with_key(|t| Evidence::new(t.clone()))
            .sources
            .extend(ev.sources);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChapterClassification {
    pub volume: String,
    pub chapter_id: String,
    pub topics: TopicEvidence,
}

/// Classification of one or more volumes treated as a single proceedings set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BookClassification {
    pub volumes: Vec<String>,
    pub per_chapter: Vec<ChapterClassification>,
    pub topic_chapter_count: BTreeMap<TopicId, usize>,
}

impl BookClassification {
    pub fn from_chapters(volumes: Vec<String>, per_chapter: Vec<ChapterClassification>) -> Self {
        let mut topic_chapter_count = BTreeMap::new();
        for ch in &per_chapter {
            for t in ch.topics.keys() {
                *topic_chapter_count.entry(t.clone()).or_insert(0) += 1;
            }
        }
        BookClassification { volumes, per_chapter, topic_chapter_count }
    }

    pub fn chapter_count(&self) -> usize {
        self.per_chapter.len()
    }

    pub fn contains(&self, t: &TopicId) -> bool {
        self.topic_chapter_count.contains_key(t)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid classifier configuration: {0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ClassifierConfig {
    pub lev_threshold: f64,
    pub knn_k: usize,
    pub knn_min_sim: f64,
    pub elbow: bool,
    pub tagger: TaggerKind,
    /// Custom stopword list; the built-in English list when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<Vec<String>>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            lev_threshold: 0.94,
            knn_k: 10,
            knn_min_sim: 0.7,
            elbow: true,
            tagger: TaggerKind::Lexicon,
            stopwords: None,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.lev_threshold > 0.0 && self.lev_threshold <= 1.0) {
            return Err(ConfigError(format!("levThreshold {} is outside (0, 1]", self.lev_threshold)));
        }
        if self.knn_k == 0 {
            return Err(ConfigError("knnK must be positive".into()));
        }
        if !(-1.0..=1.0).contains(&self.knn_min_sim) {
            return Err(ConfigError(format!("knnMinSim {} is outside [-1, 1]", self.knn_min_sim)));
        }
        Ok(())
    }
}

/// Label strings bucketed by character length, for length-bound pruning.
struct LabelBuckets {
    by_len: BTreeMap<usize, Vec<(Vec<char>, String)>>,
}

impl LabelBuckets {
    fn new(ontology: &Ontology) -> Self {
        let mut by_len: BTreeMap<usize, Vec<(Vec<char>, String)>> = BTreeMap::new();
        for alias in ontology.label_index().keys() {
            let chars: Vec<char> = alias.chars().collect();
            by_len.entry(chars.len()).or_default().push((chars, alias.clone()));
        }
        LabelBuckets { by_len }
    }
}

pub struct Classifier {
    ontology: Arc<Ontology>,
    model: Option<Arc<EmbeddingModel>>,
    config: ClassifierConfig,
    stopwords: HashSet<String>,
    tagger: Box<dyn Tagger>,
    labels: LabelBuckets,
}

impl std::fmt::Debug for Classifier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Classifier")
            .field("topics", &self.ontology.len())
            .field("model", &self.model.as_ref().map(|m| m.len()))
            .field("config", &self.config)
            .finish()
    }
}

impl Classifier {
    pub fn new(
        ontology: Arc<Ontology>,
        model: Option<Arc<EmbeddingModel>>,
        config: ClassifierConfig,
    ) -> Result<Self, ConfigError> {
        config.validate()?;
        let stopwords: HashSet<String> = match &config.stopwords {
            Some(list) => list.iter().map(|s| s.to_lowercase()).collect(),
            None => ENGLISH_STOPWORDS.iter().map(|s| s.to_string()).collect(),
        };
        let tagger = config.tagger.build(&stopwords);
        let labels = LabelBuckets::new(&ontology);
        Ok(Classifier { ontology, model, config, stopwords, tagger, labels })
    }

    /// Replace the bundled tagger.
    pub fn with_tagger(mut self, tagger: Box<dyn Tagger>) -> Self {
        self.tagger = tagger;
        self
    }

    pub fn config(&self) -> &ClassifierConfig {
        &self.config
    }

    pub fn ontology(&self) -> &Arc<Ontology> {
        &self.ontology
    }

    pub fn model(&self) -> Option<&Arc<EmbeddingModel>> {
        self.model.as_ref()
    }

    pub fn stopwords(&self) -> &HashSet<String> {
        &self.stopwords
    }

    /// Union of both detectors followed by super-topic enrichment.
    pub fn classify_chapter(&self, volume: &str, ch: &Chapter) -> ChapterClassification {
        let mut found = self.syntactic_classify(ch);
        merge_into(&mut found, self.semantic_classify(ch));
        let topics = enrich(&self.ontology, found);
        ChapterClassification { volume: volume.to_string(), chapter_id: ch.chapter_id.clone(), topics }
    }

    /// Classify every chapter of every book, merged into one classification.
    pub fn classify_books(&self, books: &[Book], parallel: bool) -> BookClassification {
        let chapters: Vec<(&str, &Chapter)> = books
            .iter()
            .flat_map(|b| b.chapters.iter().map(move |c| (b.volume_number.as_str(), c)))
            .collect();
        let per_chapter: Vec<ChapterClassification> = if parallel {
            chapters.par_iter().map(|(v, c)| self.classify_chapter(v, c)).collect()
        } else {
            chapters.iter().map(|(v, c)| self.classify_chapter(v, c)).collect()
        };
        let volumes = books.iter().map(|b| b.volume_number.clone()).collect();
        BookClassification::from_chapters(volumes, per_chapter)
    }

    pub fn classify_book(&self, book: &Book, parallel: bool) -> BookClassification {
        self.classify_books(std::slice::from_ref(book), parallel)
    }
}

/// Text fields scanned by both detectors, in a fixed order.
pub(crate) fn chapter_fields(ch: &Chapter) -> Vec<(Field, &str)> {
    let mut fields = vec![(Field::Title, ch.title.as_str()), (Field::Abstract, ch.r#abstract.as_str())];
    fields.extend(ch.keywords.iter().enumerate().map(|(i, k)| (Field::Keyword(i), k.as_str())));
    fields
}

/// Add every super-topic of the detected topics, carrying the detected topic's
/// triggers as `enhanced` sources.
pub fn enrich(ontology: &Ontology, found: TopicEvidence) -> TopicEvidence {
    let mut out = found.clone();
    for (topic, ev) in &found {
        let Ok(ancestors) = ontology.super_topics(topic) else { continue };
        for ancestor in ancestors {
            let entry = out.entry(ancestor.clone()).or_insert_with(|| Evidence::new(ancestor));
            entry.sources.extend(ev.sources.iter().map(|s| Source { origin: Origin::Enhanced, ..s.clone() }));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::OntologyFile;

    pub(crate) fn chain_ontology() -> Arc<Ontology> {
        let file: OntologyFile = serde_json::from_value(serde_json::json!({
            "topics": [
                {"id": "computer science", "label": "Computer Science"},
                {"id": "artificial intelligence", "label": "Artificial Intelligence"},
                {"id": "machine learning", "label": "Machine Learning"},
                {"id": "neural networks", "label": "Neural Networks"},
                {"id": "semantic web", "label": "Semantic Web"},
                {"id": "linked data", "label": "Linked Data"}
            ],
            "relations": [
                {"type": "superTopicOf", "source": "computer science", "target": "artificial intelligence"},
                {"type": "superTopicOf", "source": "artificial intelligence", "target": "machine learning"},
                {"type": "superTopicOf", "source": "machine learning", "target": "neural networks"},
                {"type": "superTopicOf", "source": "computer science", "target": "semantic web"},
                {"type": "superTopicOf", "source": "semantic web", "target": "linked data"}
            ]
        }))
        .unwrap();
        Arc::new(Ontology::from_file(file).unwrap())
    }

    pub(crate) fn chapter(title: &str, abs: &str, keywords: &[&str]) -> Chapter {
        Chapter {
            chapter_id: "c1".into(),
            title: title.into(),
            r#abstract: abs.into(),
            keywords: keywords.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn ids(m: &TopicEvidence) -> BTreeSet<&str> {
        m.keys().map(|t| t.as_str()).collect()
    }

    #[test]
    fn enrichment_adds_chain() {
        let c = Classifier::new(chain_ontology(), None, ClassifierConfig::default()).unwrap();
        let cc = c.classify_chapter("1", &chapter("Training neural networks", "", &[]));
        assert_eq!(
            ids(&cc.topics),
            BTreeSet::from(["neural networks", "machine learning", "artificial intelligence", "computer science"])
        );
        let ml = &cc.topics[&TopicId::new("machine learning").unwrap()];
        assert!(ml.is_enhanced_only());
        assert!(ml.sources.iter().all(|s| s.ngram == "neural networks"));
    }

    #[test]
    fn empty_chapter_has_no_topics() {
        let c = Classifier::new(chain_ontology(), None, ClassifierConfig::default()).unwrap();
        let cc = c.classify_chapter("1", &chapter("Untitled remarks", "", &[]));
        assert!(cc.topics.is_empty());
    }

    #[test]
    fn book_counts_for_single_chapter() {
        let c = Classifier::new(chain_ontology(), None, ClassifierConfig::default()).unwrap();
        let book = Book {
            volume_number: "1".into(),
            series_name: "S".into(),
            conf_series_id: None,
            year: None,
            title: "B".into(),
            chapters: vec![chapter("Linked data", "", &[])],
        };
        let bc = c.classify_book(&book, true);
        assert_eq!(bc.chapter_count(), 1);
        assert!(!bc.topic_chapter_count.is_empty());
        assert!(bc.topic_chapter_count.values().all(|&n| n == 1));
    }

    #[test]
    fn config_validation() {
        let bad = ClassifierConfig { lev_threshold: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ClassifierConfig { knn_k: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ClassifierConfig { knn_min_sim: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(ClassifierConfig::default().validate().is_ok());
    }

    #[test]
    fn config_json_uses_camel_case() {
        let v = serde_json::to_value(ClassifierConfig::default()).unwrap();
        assert_eq!(v["levThreshold"], 0.94);
        assert_eq!(v["knnK"], 10);
        assert_eq!(v["knnMinSim"], 0.7);
        assert_eq!(v["tagger"], "lexicon");
    }
}
