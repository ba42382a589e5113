//! Fixture builders and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde_json::json;
use topic_annotator::classifier::{BookClassification, ChapterClassification, Evidence, Field, Origin, Source, TopicEvidence};
use topic_annotator::ontology::{Ontology, TopicId};
use topic_annotator::text::Span;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn tid(s: &str) -> TopicId {
    TopicId::new(s).unwrap()
}

pub fn node_name(i: usize) -> String {
    // letters only, so names never share a prefix-digit pattern that sits above the threshold
    const SYL: [&str; 10] = ["ka", "lo", "mi", "nu", "pe", "ra", "si", "to", "vu", "ze"];
    format!("topic {}{}", SYL[i / 10 % 10], SYL[i % 10])
}

/// A random DAG: edges only run from lower to higher index.
pub struct RandomDag {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl RandomDag {
    pub fn generate(rng: &mut impl Rng, n: usize, p: f64) -> Self {
        let mut edges = Vec::new();
        for child in 1..n {
            for parent in 0..child {
                if rng.random_bool(p) {
                    edges.push((parent, child));
                }
            }
        }
        RandomDag { n, edges }
    }

    pub fn ontology(&self) -> Ontology {
        let topics: Vec<_> = (0..self.n).map(|i| json!({"id": node_name(i), "label": node_name(i)})).collect();
        let relations: Vec<_> = self
            .edges
            .iter()
            .map(|(p, c)| json!({"type": "superTopicOf", "source": node_name(*p), "target": node_name(*c)}))
            .collect();
        Ontology::from_json(&json!({"topics": topics, "relations": relations}).to_string()).unwrap()
    }

    pub fn parents(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |(_, ch)| *ch == c).map(|(p, _)| *p)
    }

    /// Fixpoint iteration over the parent relation.
    pub fn ancestors(&self, c: usize) -> BTreeSet<usize> {
        let mut set: BTreeSet<usize> = self.parents(c).collect();
        loop {
            let grown: BTreeSet<usize> = set.iter().flat_map(|&x| self.parents(x)).chain(set.iter().copied()).collect();
            if grown.len() == set.len() {
                return set;
            }
            set = grown;
        }
    }
}

pub fn source(topic_text: &str, field: Field, start: usize, origin: Origin) -> Source {
    Source {
        ngram: topic_text.to_string(),
        chapter_id: String::new(),
        field,
        span: Span::new(start, start + topic_text.chars().count()),
        origin,
        matched_label: topic_text.to_string(),
        score: 1.0,
    }
}

/// Chapters carrying random topic sets, each topic with one synthetic trigger.
pub fn random_classification(rng: &mut impl Rng, topics: &[TopicId], chapters: usize, max_per_chapter: usize) -> BookClassification {
    let per_chapter = (0..chapters)
        .map(|i| {
            let k = rng.random_range(0..=max_per_chapter.min(topics.len()));
            let mut map = TopicEvidence::new();
            for t in topics.choose_multiple(rng, k) {
                let gram = format!("gram{}", rng.random_range(0..6));
                map.insert(
                    t.clone(),
                    Evidence { topic: t.clone(), sources: vec![source(&gram, Field::Abstract, 0, Origin::Syntactic)] },
                );
            }
            ChapterClassification { volume: "1".into(), chapter_id: format!("ch{i}"), topics: map }
        })
        .collect();
    BookClassification::from_chapters(vec!["1".into()], per_chapter)
}

pub fn chapter_sets(bc: &BookClassification) -> BTreeMap<TopicId, BTreeSet<usize>> {
    let mut out: BTreeMap<TopicId, BTreeSet<usize>> = BTreeMap::new();
    for (i, cc) in bc.per_chapter.iter().enumerate() {
        for t in cc.topics.keys() {
            out.entry(t.clone()).or_default().insert(i);
        }
    }
    out
}

/// Spawn the HTTP service on an ephemeral port; returns its base URL.
pub fn spawn_service(state: std::sync::Arc<topic_annotator::service::AppState>) -> String {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, topic_annotator::service::router(state)).await.unwrap();
        });
    });
    format!("http://{}", rx.recv().unwrap())
}
