use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::elbow::elbow_select;
use super::tagger::extract_candidate_terms;
use super::{chapter_fields, Classifier, Evidence, Field, Origin, Source, TopicEvidence};
use crate::ingest::Chapter;
use crate::ontology::TopicId;
use crate::text::Span;

/// One topic identification by one n-gram occurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SemanticEvent {
    pub topic: TopicId,
    pub ngram: String,
    pub field: Field,
    pub span: Span,
    /// Highest-ranked neighbour that resolved to the topic.
    pub neighbor: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemanticScore {
    pub frequency: usize,
    pub diversity: usize,
    pub relevance: f64,
}

impl Classifier {
    /// Identification events in text order. Each n-gram occurrence identifies a
    /// topic at most once, however many of its neighbours map to that topic.
    pub fn semantic_events(&self, ch: &Chapter) -> Vec<SemanticEvent> {
        let Some(model) = self.model.as_deref() else { return Vec::new() };
        let mut events = Vec::new();
        for (field, text) in chapter_fields(ch) {
            let chunks = match extract_candidate_terms(text, self.tagger.as_ref()) {
                Ok(c) => c,
                Err(e) => {
                    log::warn!("chapter {}: {e}", ch.chapter_id);
                    continue;
                }
            };
            for gram in chunks.iter().flat_map(|c| c.ngrams()) {
                let Some(v) = model.vector_of(&gram.tokens) else { continue };
                let Ok(neighbors) = model.most_similar(&v, self.config.knn_k, self.config.knn_min_sim) else {
                    continue;
                };
                let mut seen: BTreeSet<TopicId> = BTreeSet::new();
                for n in neighbors {
                    if model.is_excluded(&n.token) {
                        continue;
                    }
                    let label = n.token.replace('_', " ");
                    for topic in self.ontology.resolve_label(&label) {
                        if seen.insert(topic.clone()) {
                            events.push(SemanticEvent {
                                topic,
                                ngram: gram.text(),
                                field,
                                span: gram.span,
                                neighbor: label.clone(),
                                similarity: n.similarity,
                            });
                        }
                    }
                }
            }
        }
        events
    }

    /// Relevance = frequency (events) × diversity (distinct n-grams), before elbow selection.
    pub fn semantic_scores(&self, ch: &Chapter) -> BTreeMap<TopicId, SemanticScore> {
        score_events(&self.semantic_events(ch))
    }

    pub fn semantic_classify(&self, ch: &Chapter) -> TopicEvidence {
        let events = self.semantic_events(ch);
        let scores = score_events(&events);
        let keep: BTreeSet<TopicId> = if self.config.elbow {
            let ranked: Vec<(TopicId, f64)> = scores.iter().map(|(t, s)| (t.clone(), s.relevance)).collect();
            elbow_select(&ranked).into_iter().collect()
        } else {
            scores.keys().cloned().collect()
        };
        let mut out = TopicEvidence::new();
        for ev in events {
            if !keep.contains(&ev.topic) {
                continue;
            }
            let relevance = scores[&ev.topic].relevance;
            out.entry(ev.topic.clone()).or_insert_with(|| Evidence::new(ev.topic.clone())).sources.push(Source {
                ngram: ev.ngram,
                chapter_id: ch.chapter_id.clone(),
                field: ev.field,
                span: ev.span,
                origin: Origin::Semantic,
                matched_label: ev.neighbor,
                score: relevance,
            });
        }
        out
    }
}

fn score_events(events: &[SemanticEvent]) -> BTreeMap<TopicId, SemanticScore> {
    let mut grouped: BTreeMap<&TopicId, (usize, BTreeSet<&str>)> = BTreeMap::new();
    for e in events {
        let entry = grouped.entry(&e.topic).or_default();
        entry.0 += 1;
        entry.1.insert(e.ngram.as_str());
    }
    grouped
        .into_iter()
        .map(|(t, (frequency, grams))| {
            let diversity = grams.len();
            (t.clone(), SemanticScore { frequency, diversity, relevance: (frequency * diversity) as f64 })
        })
        .collect()
}
