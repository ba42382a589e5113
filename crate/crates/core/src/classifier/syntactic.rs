use super::levenshtein::{similarity_bound, similarity_chars};
use super::ngrams::extract_ngrams;
use super::{chapter_fields, Classifier, Evidence, Origin, Source, TopicEvidence};
use crate::ingest::Chapter;
use crate::text::normalize_label;

impl Classifier {
    /// Every ontology label within `lev_threshold` Levenshtein similarity of an
    /// n-gram from title, abstract or keywords.
    pub fn syntactic_classify(&self, ch: &Chapter) -> TopicEvidence {
        let threshold = self.config.lev_threshold;
        let index = self.ontology.label_index();
        let mut out = TopicEvidence::new();
        for (field, text) in chapter_fields(ch) {
            for gram in extract_ngrams(text, &self.stopwords) {
                let ngram = normalize_label(&gram.text());
                let chars: Vec<char> = ngram.chars().collect();
                for (&len, labels) in &self.labels.by_len {
                    // skipping is exact: the length bound dominates the similarity
                    if similarity_bound(chars.len(), len) < threshold {
                        continue;
                    }
                    for (label_chars, label) in labels {
                        let sim = similarity_chars(&chars, label_chars);
                        if sim < threshold {
                            continue;
                        }
                        for topic in &index[label] {
                            out.entry(topic.clone()).or_insert_with(|| Evidence::new(topic.clone())).sources.push(
                                Source {
                                    ngram: ngram.clone(),
                                    chapter_id: ch.chapter_id.clone(),
                                    field,
                                    span: gram.span,
                                    origin: Origin::Syntactic,
                                    matched_label: label.clone(),
                                    score: sim,
                                },
                            );
                        }
                    }
                }
            }
        }
        out
    }
}
