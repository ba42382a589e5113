//! Per-topic explanations: the n-grams that triggered a topic (or any of its
//! classified descendants), ranked by the number of chapters they occur in.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::classifier::{BookClassification, ChapterClassification, Field};
use crate::ingest::Chapter;
use crate::ontology::{Ontology, TopicId};
use crate::text::Span;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Excerpt {
    pub text: String,
    pub chapter_count: usize,
    pub occurrence_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Explanation {
    pub topic: TopicId,
    pub excerpts: Vec<Excerpt>,
}

#[derive(Default)]
struct Tally {
    chapters: BTreeSet<usize>,
    occurrences: BTreeSet<(usize, Field, Span)>,
}

pub fn build_explanations(bc: &BookClassification, ontology: &Ontology) -> BTreeMap<TopicId, Explanation> {
    let mut tallies: BTreeMap<&TopicId, BTreeMap<&str, Tally>> = BTreeMap::new();
    for (i, ch) in bc.per_chapter.iter().enumerate() {
        for (topic, ev) in &ch.topics {
            let mut targets: Vec<&TopicId> = vec![topic];
            if let Ok(ancestors) = ontology.super_topics(topic) {
                targets.extend(
                    ancestors
                        .iter()
                        .filter_map(|a| bc.topic_chapter_count.get_key_value(a).map(|(k, _)| k)),
                );
            }
            for target in targets {
                let per_text = tallies.entry(target).or_default();
                for s in &ev.sources {
                    let tally = per_text.entry(s.ngram.as_str()).or_default();
                    tally.chapters.insert(i);
                    tally.occurrences.insert((i, s.field, s.span));
                }
            }
        }
    }

    tallies
        .into_iter()
        .map(|(topic, per_text)| {
            let mut excerpts: Vec<Excerpt> = per_text
                .into_iter()
                .map(|(text, t)| Excerpt {
                    text: text.to_string(),
                    chapter_count: t.chapters.len(),
                    occurrence_count: t.occurrences.len(),
                })
                .collect();
            excerpts.sort_by(|a, b| {
                b.chapter_count
                    .cmp(&a.chapter_count)
                    .then(b.occurrence_count.cmp(&a.occurrence_count))
                    .then_with(|| a.text.cmp(&b.text))
            });
            (topic.clone(), Explanation { topic: topic.clone(), excerpts })
        })
        .collect()
}

/// A highlighted region of a chapter abstract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Highlight {
    pub chapter_id: String,
    pub span: Span,
    pub topics: Vec<TopicId>,
}

/// Abstract spans that triggered any topic, with overlapping spans merged.
pub fn highlight_spans(ch: &Chapter, cc: &ChapterClassification) -> Vec<Highlight> {
    let mut raw: Vec<(Span, &TopicId)> = cc
        .topics
        .iter()
        .flat_map(|(t, ev)| {
            ev.sources
                .iter()
                .filter(|s| s.field == Field::Abstract)
                .map(move |s| (s.span, t))
        })
        .collect();
    raw.sort();
    raw.dedup();

    let mut out: Vec<(Span, BTreeSet<TopicId>)> = Vec::new();
    for (span, topic) in raw {
        match out.last_mut() {
            Some((cur, topics)) if cur.overlaps(&span) => {
                cur.end = cur.end.max(span.end);
                topics.insert(topic.clone());
            }
            _ => out.push((span, BTreeSet::from([topic.clone()]))),
        }
    }
    out.into_iter()
        .map(|(span, topics)| Highlight {
            chapter_id: ch.chapter_id.clone(),
            span,
            topics: topics.into_iter().collect(),
        })
        .collect()
}
