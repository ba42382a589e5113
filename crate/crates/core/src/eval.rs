//! Precision, recall and F-measure of predicted topic sets against a gold standard.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ontology::TopicId;

pub type TopicSets = BTreeMap<String, BTreeSet<TopicId>>;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("malformed topic file: {0}")]
    Parse(String),
    #[error("paper {0} listed twice")]
    DuplicatePaper(String),
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct PaperEntry {
    paper_id: String,
    topics: Vec<String>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ReportChapter {
    chapter_id: String,
    topics: Vec<String>,
}

#[derive(Deserialize)]
struct Report {
    chapters: Vec<ReportChapter>,
}

/// Parse `[{"paperId", "topics": [...]}, ...]`, or a classification report whose
/// `chapters` carry `chapterId` and `topics`. Topic strings are normalized.
pub fn parse_topic_sets(text: &str) -> Result<TopicSets, EvalError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| EvalError::Parse(e.to_string()))?;
    let entries: Vec<(String, Vec<String>)> = if value.is_array() {
        let list: Vec<PaperEntry> = serde_json::from_value(value).map_err(|e| EvalError::Parse(e.to_string()))?;
        list.into_iter().map(|p| (p.paper_id, p.topics)).collect()
    } else {
        let report: Report = serde_json::from_value(value).map_err(|e| EvalError::Parse(e.to_string()))?;
        report.chapters.into_iter().map(|c| (c.chapter_id, c.topics)).collect()
    };
    let mut out = TopicSets::new();
    for (id, topics) in entries {
        let set = topics.iter().filter_map(|t| TopicId::new(t)).collect();
        if out.insert(id.clone(), set).is_some() {
            return Err(EvalError::DuplicatePaper(id));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    Micro,
    Macro,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        Metrics { precision, recall, f1 }
    }

    fn from_counts(tp: usize, predicted: usize, gold: usize) -> Self {
        Metrics::from_pr(ratio(tp, predicted), ratio(tp, gold))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PaperMetrics {
    pub paper_id: String,
    pub true_positives: usize,
    pub predicted: usize,
    pub gold: usize,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalReport {
    pub averaging: Averaging,
    /// Headline scores under `averaging`.
    pub metrics: Metrics,
    pub micro: Metrics,
    #[serde(rename = "macro")]
    pub macro_: Metrics,
    pub papers: usize,
    pub only_in_gold: Vec<String>,
    pub only_in_predictions: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_paper: Option<Vec<PaperMetrics>>,
}

/// Score the papers present in both inputs. Micro scores pool (paper, topic)
/// pairs; macro scores average per-paper precision, recall and F1. An empty
/// denominator scores 0.
pub fn evaluate(gold: &TopicSets, predicted: &TopicSets, averaging: Averaging, per_paper: bool) -> EvalReport {
    let only_in_gold: Vec<String> = gold.keys().filter(|k| !predicted.contains_key(*k)).cloned().collect();
    let only_in_predictions: Vec<String> = predicted.keys().filter(|k| !gold.contains_key(*k)).cloned().collect();
    if !only_in_gold.is_empty() || !only_in_predictions.is_empty() {
        log::warn!(
            "paper ids differ: {} only in gold, {} only in predictions; scoring the intersection",
            only_in_gold.len(),
            only_in_predictions.len()
        );
    }

    let rows: Vec<PaperMetrics> = gold
        .iter()
        .filter_map(|(id, g)| predicted.get(id).map(|p| (id, g, p)))
        .map(|(id, g, p)| {
            let tp = g.intersection(p).count();
            PaperMetrics {
                paper_id: id.clone(),
                true_positives: tp,
                predicted: p.len(),
                gold: g.len(),
                metrics: Metrics::from_counts(tp, p.len(), g.len()),
            }
        })
        .collect();

    let sum = |f: fn(&PaperMetrics) -> usize| rows.iter().map(f).sum::<usize>();
    let micro = Metrics::from_counts(sum(|r| r.true_positives), sum(|r| r.predicted), sum(|r| r.gold));
    let n = rows.len().max(1) as f64;
    let mean = |f: fn(&Metrics) -> f64| rows.iter().map(|r| f(&r.metrics)).sum::<f64>() / n;
    let macro_ = Metrics { precision: mean(|m| m.precision), recall: mean(|m| m.recall), f1: mean(|m| m.f1) };

    EvalReport {
        averaging,
        metrics: match averaging {
            Averaging::Micro => micro,
            Averaging::Macro => macro_,
        },
        micro,
        macro_,
        papers: rows.len(),
        only_in_gold,
        only_in_predictions,
        per_paper: per_paper.then_some(rows),
    }
}
