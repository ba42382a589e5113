//! Resources loaded once, and the per-upload analysis derived from them.
//!
//! The report is built as a `serde_json::Value`, whose maps are sorted, so the
//! same input always serializes to the same bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::classifier::{BookClassification, Classifier, ClassifierConfig, ConfigError, Origin};
use crate::embeddings::{EmbeddingError, EmbeddingModel};
use crate::explain::{build_explanations, highlight_spans, Explanation, Highlight};
use crate::history::StoredRecord;
use crate::ingest::{Book, EntryError};
use crate::ontology::{Ontology, OntologyError, TopicId};
use crate::pmc::{infer_pmcs, PmcAssignment, PmcError, PmcScheme};
use crate::taxonomy::{build_taxonomy, filter_taxonomy, TaxonomyNode};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("ontology {path}: {source}")]
    Ontology { path: String, source: OntologyError },
    #[error("embedding model {path}: {source}")]
    Model { path: String, source: EmbeddingError },
    #[error("code scheme {path}: {source}")]
    Scheme { path: String, source: PmcError },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Default)]
pub struct EngineConfig {
    pub ontology: PathBuf,
    pub model: Option<PathBuf>,
    pub scheme: Option<PathBuf>,
    pub classifier: ClassifierConfig,
}

#[derive(Debug)]
pub struct Engine {
    classifier: Classifier,
    scheme: Option<PmcScheme>,
    runs: AtomicU64,
}

impl Engine {
    pub fn new(classifier: Classifier, scheme: Option<PmcScheme>) -> Self {
        let scheme = scheme.map(|s| s.canonicalize(classifier.ontology()));
        Engine { classifier, scheme, runs: AtomicU64::new(0) }
    }

    pub fn load(cfg: &EngineConfig) -> Result<Self, LoadError> {
        let shown = |p: &PathBuf| p.display().to_string();
        let ontology = Ontology::load(&cfg.ontology)
            .map_err(|source| LoadError::Ontology { path: shown(&cfg.ontology), source })?;
        let model = cfg
            .model
            .as_ref()
            .map(|p| EmbeddingModel::load(p).map_err(|source| LoadError::Model { path: shown(p), source }))
            .transpose()?;
        let scheme = cfg
            .scheme
            .as_ref()
            .map(|p| PmcScheme::load(p).map_err(|source| LoadError::Scheme { path: shown(p), source }))
            .transpose()?;
        log::info!(
            "loaded {} topics, {} embedding tokens, {} codes",
            ontology.len(),
            model.as_ref().map_or(0, |m| m.len()),
            scheme.as_ref().map_or(0, |s| s.codes().count())
        );
        let classifier = Classifier::new(Arc::new(ontology), model.map(Arc::new), cfg.classifier.clone())?;
        Ok(Engine::new(classifier, scheme))
    }

    pub fn classifier(&self) -> &Classifier {
        &self.classifier
    }

    pub fn ontology(&self) -> &Ontology {
        self.classifier.ontology()
    }

    pub fn scheme(&self) -> Option<&PmcScheme> {
        self.scheme.as_ref()
    }

    /// Number of classification runs since the engine was built.
    pub fn classification_runs(&self) -> u64 {
        self.runs.load(Ordering::Relaxed)
    }

    /// Classify all books as one proceedings set and derive everything shown to editors.
    pub fn analyze(&self, books: Vec<Book>, ingest_errors: Vec<EntryError>, parallel: bool) -> Analysis {
        self.runs.fetch_add(1, Ordering::Relaxed);
        let classification = self.classifier.classify_books(&books, parallel);
        let ontology = self.ontology();
        let explanations = build_explanations(&classification, ontology);
        let taxonomy = build_taxonomy(&classification, ontology);
        let pmcs = self.scheme.as_ref().map(|s| infer_pmcs(&classification, s)).unwrap_or_default();
        let chapters: Vec<_> = books.iter().flat_map(|b| b.chapters.iter()).collect();
        let highlights = chapters
            .iter()
            .zip(&classification.per_chapter)
            .map(|(ch, cc)| highlight_spans(ch, cc))
            .collect();
        let labels = classification
            .topic_chapter_count
            .keys()
            .map(|t| (t.clone(), ontology.label_of(t).to_string()))
            .collect();
        Analysis {
            config: config_echo(&self.classifier),
            books,
            ingest_errors,
            classification,
            explanations,
            taxonomy,
            pmcs,
            highlights,
            labels,
        }
    }
}

fn config_echo(c: &Classifier) -> Value {
    let mut v = serde_json::to_value(c.config()).expect("config serializes");
    v["semanticModule"] = json!(c.model().is_some());
    v["excludedTop"] = json!(c.model().map_or(0, |m| m.excluded_count()));
    v
}

/// Classification of one upload plus everything derived from it. Built once;
/// every view below (filtering, marks, explanations) reads from it.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub config: Value,
    pub books: Vec<Book>,
    pub ingest_errors: Vec<EntryError>,
    pub classification: BookClassification,
    pub explanations: BTreeMap<TopicId, Explanation>,
    pub taxonomy: Vec<TaxonomyNode>,
    pub pmcs: Vec<PmcAssignment>,
    /// Parallel to `classification.per_chapter`.
    pub highlights: Vec<Vec<Highlight>>,
    labels: BTreeMap<TopicId, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TopicSummary {
    pub topic: TopicId,
    pub label: String,
    pub chapter_count: usize,
    pub origins: BTreeSet<Origin>,
    pub previous_edition: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PmcSummary {
    #[serde(flatten)]
    pub pmc: PmcAssignment,
    pub previous_edition: bool,
}

impl Analysis {
    pub fn chapter_count(&self) -> usize {
        self.classification.chapter_count()
    }

    /// Series identifier of the upload, taken from the first book that carries one.
    pub fn conf_series_id(&self) -> Option<&str> {
        let mut ids = self.books.iter().filter_map(|b| b.conf_series_id.as_deref());
        let first = ids.next();
        if let Some(other) = ids.find(|id| Some(*id) != first) {
            log::warn!("books disagree on conference series ({} vs {other}); using the first", first.unwrap_or(""));
        }
        first
    }

    pub fn year(&self) -> Option<i32> {
        self.books.iter().filter_map(|b| b.year).max()
    }

    pub fn volumes(&self) -> Vec<String> {
        self.classification.volumes.clone()
    }

    /// Topics sorted by chapter count (descending), then id.
    pub fn topics(&self, previous: Option<&StoredRecord>) -> Vec<TopicSummary> {
        let used = previous.map(|p| p.record.used_topics()).unwrap_or_default();
        let mut origins: BTreeMap<&TopicId, BTreeSet<Origin>> = BTreeMap::new();
        for cc in &self.classification.per_chapter {
            for (t, ev) in &cc.topics {
                origins.entry(t).or_default().extend(ev.origins());
            }
        }
        let mut out: Vec<TopicSummary> = self
            .classification
            .topic_chapter_count
            .iter()
            .map(|(t, &n)| TopicSummary {
                topic: t.clone(),
                label: self.labels[t].clone(),
                chapter_count: n,
                origins: origins.remove(t).unwrap_or_default(),
                previous_edition: used.contains(t),
            })
            .collect();
        out.sort_by(|a, b| b.chapter_count.cmp(&a.chapter_count).then_with(|| a.topic.cmp(&b.topic)));
        out
    }

    pub fn pmcs(&self, previous: Option<&StoredRecord>) -> Vec<PmcSummary> {
        let used: BTreeSet<&str> =
            previous.map(|p| p.record.selected_pmcs.iter().map(|s| s.as_str()).collect()).unwrap_or_default();
        self.pmcs
            .iter()
            .map(|p| PmcSummary { pmc: p.clone(), previous_edition: used.contains(p.code.as_str()) })
            .collect()
    }

    pub fn taxonomy(&self, min_chapters: usize) -> Vec<TaxonomyNode> {
        filter_taxonomy(&self.taxonomy, min_chapters)
    }

    pub fn label(&self, t: &TopicId) -> Option<&str> {
        self.labels.get(t).map(|s| s.as_str())
    }

    /// Per-chapter view: metadata, topic evidence and abstract highlights.
    pub fn chapters_json(&self) -> Value {
        let chapters = self.books.iter().flat_map(|b| b.chapters.iter());
        let rows: Vec<Value> = chapters
            .zip(&self.classification.per_chapter)
            .zip(&self.highlights)
            .map(|((ch, cc), hl)| {
                json!({
                    "chapterId": ch.chapter_id,
                    "volume": cc.volume,
                    "title": ch.title,
                    "abstract": ch.r#abstract,
                    "keywords": ch.keywords,
                    "topics": cc.topics.keys().collect::<Vec<_>>(),
                    "evidence": cc.topics.iter().map(|(t, ev)| (t.to_string(), &ev.sources)).collect::<BTreeMap<_, _>>(),
                    "highlights": hl,
                })
            })
            .collect();
        Value::Array(rows)
    }

    /// Full report: topics with explanations, filtered taxonomy, codes and chapters.
    pub fn report(&self, min_chapters: usize, previous: Option<&StoredRecord>) -> Value {
        let topics: Vec<Value> = self
            .topics(previous)
            .into_iter()
            .map(|t| {
                let mut v = serde_json::to_value(&t).expect("topic serializes");
                v["explanation"] = json!(self.explanations.get(&t.topic).map(|e| &e.excerpts));
                v
            })
            .collect();
        let books: Vec<Value> = self
            .books
            .iter()
            .map(|b| {
                json!({
                    "volumeNumber": b.volume_number,
                    "seriesName": b.series_name,
                    "confSeriesId": b.conf_series_id,
                    "year": b.year,
                    "title": b.title,
                    "chapterCount": b.chapters.len(),
                })
            })
            .collect();
        let errors: Vec<Value> =
            self.ingest_errors.iter().map(|e| json!({"entry": e.entry, "message": e.error.to_string()})).collect();
        json!({
            "config": self.config,
            "books": books,
            "ingestErrors": errors,
            "chapterCount": self.chapter_count(),
            "minChapters": min_chapters,
            "topics": topics,
            "taxonomy": self.taxonomy(min_chapters),
            "pmcs": self.pmcs(previous),
            "chapters": self.chapters_json(),
            "previousEdition": previous.map(|p| json!({"receipt": p.receipt, "year": p.record.year})),
        })
    }
}

/// Serialize a report the same way every time.
pub fn to_stable_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Chapter;

    fn engine() -> Engine {
        let o = Ontology::from_json(
            &json!({
                "topics": [
                    {"id": "computer science", "label": "Computer Science"},
                    {"id": "semantic web", "label": "Semantic Web"},
                    {"id": "linked data", "label": "Linked Data"},
                    {"id": "cryptography", "label": "Cryptography"}
                ],
                "relations": [
                    {"type": "superTopicOf", "source": "computer science", "target": "semantic web"},
                    {"type": "superTopicOf", "source": "semantic web", "target": "linked data"},
                    {"type": "superTopicOf", "source": "computer science", "target": "cryptography"}
                ]
            })
            .to_string(),
        )
        .unwrap();
        let scheme = PmcScheme::from_json(
            r#"{"codes":[{"code":"I00001","label":"Computer Science, general","level":1},
                         {"code":"I15009","label":"Data Structures","level":2,"parent":"I00001"},
                         {"code":"I15033","label":"Data Encryption","level":3,"parent":"I15009"}],
                "mapping":[{"code":"I15033","topic":"cryptography"}]}"#,
        )
        .unwrap();
        let c = Classifier::new(Arc::new(o), None, ClassifierConfig::default()).unwrap();
        Engine::new(c, Some(scheme))
    }

    fn book() -> Book {
        let ch = |id: &str, title: &str, abs: &str| Chapter {
            chapter_id: id.into(),
            title: title.into(),
            r#abstract: abs.into(),
            keywords: vec![],
        };
        Book {
            volume_number: "1".into(),
            series_name: "LNCS".into(),
            conf_series_id: Some("iswc".into()),
            year: Some(2018),
            title: "Proceedings".into(),
            chapters: vec![
                ch("a", "Linked data at scale", "We publish linked data."),
                ch("b", "Lightweight cryptography", ""),
                ch("c", "Semantic web agents", "Agents on the semantic web."),
            ],
        }
    }

    #[test]
    fn analysis_counts_and_pmcs() {
        let e = engine();
        let a = e.analyze(vec![book()], vec![], true);
        assert_eq!(e.classification_runs(), 1);
        let topics = a.topics(None);
        assert_eq!(topics[0].topic.as_str(), "computer science");
        assert_eq!(topics[0].chapter_count, 3);
        assert_eq!(topics[0].origins, BTreeSet::from([Origin::Enhanced]));
        let codes: Vec<&str> = a.pmcs.iter().map(|p| p.code.as_str()).collect();
        assert_eq!(codes, vec!["I00001", "I15009", "I15033"]);
        assert_eq!(a.highlights[0][0].span, crate::text::Span::new(11, 22));
    }

    #[test]
    fn report_is_stable_and_filtered() {
        let e = engine();
        let a = e.analyze(vec![book()], vec![], true);
        let b = e.analyze(vec![book()], vec![], false);
        let (ra, rb) = (to_stable_json(&a.report(2, None)), to_stable_json(&b.report(2, None)));
        assert_eq!(ra, rb);
        let v: Value = serde_json::from_str(&ra).unwrap();
        assert_eq!(v["chapterCount"], 3);
        assert_eq!(v["taxonomy"][0]["topic"], "computer science");
        assert_eq!(v["taxonomy"][0]["children"][0]["topic"], "semantic web");
        assert_eq!(v["taxonomy"][0]["children"].as_array().unwrap().len(), 1);
        assert_eq!(v["config"]["levThreshold"], 0.94);
        assert_eq!(v["previousEdition"], Value::Null);
    }
}
