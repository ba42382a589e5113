//! Research-topic ontology: a `superTopicOf` hierarchy over canonical topics,
//! with `relatedEquivalent` classes folded into a single representative.
//!
//! The representative of an equivalence class is its lexicographically
//! smallest id; every member id and label becomes an alias that the label
//! index resolves to the representative.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::text::normalize_label;

#[derive(Debug, thiserror::Error)]
pub enum OntologyError {
    #[error("cannot read ontology: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed ontology: {0}")]
    Parse(String),
    #[error("superTopicOf cycle: {}", path.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(" -> "))]
    Cycle { path: Vec<TopicId> },
    #[error("relation {relation} references unknown topic '{id}'")]
    DanglingRef { relation: String, id: String },
    #[error("unknown topic '{0}'")]
    UnknownTopic(String),
}

/// Canonical topic identifier: a normalized label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TopicId(String);

impl TopicId {
    /// Normalizes `raw`; fails on strings that normalize to nothing.
    pub fn new(raw: &str) -> Option<Self> {
        let id = normalize_label(raw);
        (!id.is_empty()).then_some(TopicId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for TopicId {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        TopicId::new(&value).ok_or_else(|| "empty topic id".to_string())
    }
}

impl From<TopicId> for String {
    fn from(t: TopicId) -> String {
        t.0
    }
}

impl fmt::Display for TopicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for TopicId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Topic {
    pub id: TopicId,
    pub label: String,
    /// Normalized labels and ids of every class member, including this topic.
    pub aliases: BTreeSet<String>,
    /// Non-canonical class members (id → display label).
    pub merged: BTreeMap<TopicId, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationType {
    #[serde(rename = "superTopicOf")]
    SuperTopicOf,
    #[serde(rename = "relatedEquivalent")]
    RelatedEquivalent,
    #[serde(rename = "contributesTo")]
    ContributesTo,
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationType::SuperTopicOf => "superTopicOf",
            RelationType::RelatedEquivalent => "relatedEquivalent",
            RelationType::ContributesTo => "contributesTo",
        })
    }
}

/// On-disk ontology document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OntologyFile {
    pub topics: Vec<TopicEntry>,
    #[serde(default)]
    pub relations: Vec<RelationEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicEntry {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationEntry {
    #[serde(rename = "type")]
    pub kind: RelationType,
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Ontology {
    topics: BTreeMap<TopicId, Topic>,
    parents: BTreeMap<TopicId, BTreeSet<TopicId>>,
    children: BTreeMap<TopicId, BTreeSet<TopicId>>,
    contributes_to: BTreeSet<(TopicId, TopicId)>,
    label_index: BTreeMap<String, BTreeSet<TopicId>>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl Ontology {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, OntologyError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, OntologyError> {
        let file: OntologyFile =
            serde_json::from_str(text).map_err(|e| OntologyError::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn from_file(file: OntologyFile) -> Result<Self, OntologyError> {
        // Sorted distinct ids; index order == lexicographic order so union-find roots
        // at the smallest index give the smallest id.
        let mut entries: BTreeMap<TopicId, String> = BTreeMap::new();
        for t in &file.topics {
            let id = TopicId::new(&t.id)
                .ok_or_else(|| OntologyError::Parse(format!("empty topic id (label '{}')", t.label)))?;
            if entries.insert(id.clone(), t.label.clone()).is_some() {
                return Err(OntologyError::Parse(format!("duplicate topic id '{id}'")));
            }
        }
        let ids: Vec<TopicId> = entries.keys().cloned().collect();
        let position: HashMap<&TopicId, usize> = ids.iter().enumerate().map(|(i, t)| (t, i)).collect();

        let lookup = |relation: RelationType, raw: &str| -> Result<usize, OntologyError> {
            TopicId::new(raw)
                .and_then(|id| position.get(&id).copied())
                .ok_or_else(|| OntologyError::DanglingRef {
                    relation: relation.to_string(),
                    id: raw.to_string(),
                })
        };

        let mut uf = UnionFind::new(ids.len());
        let mut hierarchy = Vec::new();
        let mut contributes = Vec::new();
        for rel in &file.relations {
            let s = lookup(rel.kind, &rel.source)?;
            let t = lookup(rel.kind, &rel.target)?;
            match rel.kind {
                RelationType::RelatedEquivalent => uf.union(s, t),
                RelationType::SuperTopicOf => hierarchy.push((s, t)),
                RelationType::ContributesTo => contributes.push((s, t)),
            }
        }

        let mut topics: BTreeMap<TopicId, Topic> = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            let root = uf.find(i);
            let canon = &ids[root];
            let label = &entries[id];
            let topic = topics.entry(canon.clone()).or_insert_with(|| Topic {
                id: canon.clone(),
                label: entries[canon].clone(),
                aliases: BTreeSet::new(),
                merged: BTreeMap::new(),
            });
            topic.aliases.insert(id.as_str().to_string());
            let norm = normalize_label(label);
            if !norm.is_empty() {
                topic.aliases.insert(norm);
            }
            if root != i {
                topic.merged.insert(id.clone(), label.clone());
            }
        }

        let mut canonical_of = |i: usize| ids[uf.find(i)].clone();
        let mut parents: BTreeMap<TopicId, BTreeSet<TopicId>> = BTreeMap::new();
        let mut children: BTreeMap<TopicId, BTreeSet<TopicId>> = BTreeMap::new();
        for (s, t) in hierarchy {
            let (sup, sub) = (canonical_of(s), canonical_of(t));
            if sup == sub {
                return Err(OntologyError::Cycle { path: vec![sup.clone(), sup] });
            }
            parents.entry(sub.clone()).or_default().insert(sup.clone());
            children.entry(sup).or_default().insert(sub);
        }
        let contributes_to = contributes
            .into_iter()
            .map(|(s, t)| (canonical_of(s), canonical_of(t)))
            .collect();

        let mut label_index: BTreeMap<String, BTreeSet<TopicId>> = BTreeMap::new();
        for topic in topics.values() {
            for alias in &topic.aliases {
                label_index.entry(alias.clone()).or_default().insert(topic.id.clone());
            }
        }

        let ontology = Ontology { topics, parents, children, contributes_to, label_index };
        if let Some(path) = ontology.find_cycle() {
            return Err(OntologyError::Cycle { path });
        }
        Ok(ontology)
    }

    /// Iterative three-colour DFS over child edges; returns the first cycle found.
    fn find_cycle(&self) -> Option<Vec<TopicId>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Open,
            Done,
        }
        let mut marks: HashMap<&TopicId, Mark> = HashMap::new();
        for start in self.topics.keys() {
            if marks.contains_key(start) {
                continue;
            }
            let mut stack: Vec<(&TopicId, Vec<&TopicId>)> = vec![(start, self.children_of(start))];
            let mut path: Vec<&TopicId> = vec![start];
            marks.insert(start, Mark::Open);
            while let Some((_, pending)) = stack.last_mut() {
                match pending.pop() {
                    Some(next) => match marks.get(next) {
                        Some(Mark::Open) => {
                            let from = path.iter().position(|t| *t == next).unwrap_or(0);
                            let mut cycle: Vec<TopicId> = path[from..].iter().map(|t| (*t).clone()).collect();
                            cycle.push(next.clone());
                            return Some(cycle);
                        }
                        Some(Mark::Done) => {}
                        None => {
                            marks.insert(next, Mark::Open);
                            path.push(next);
                            stack.push((next, self.children_of(next)));
                        }
                    },
                    None => {
                        let (done, _) = stack.pop().expect("non-empty stack");
                        marks.insert(done, Mark::Done);
                        path.pop();
                    }
                }
            }
        }
        None
    }

    fn children_of(&self, t: &TopicId) -> Vec<&TopicId> {
        self.children.get(t).map(|c| c.iter().rev().collect()).unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    pub fn contains(&self, t: &TopicId) -> bool {
        self.topics.contains_key(t)
    }

    pub fn topic(&self, t: &TopicId) -> Option<&Topic> {
        self.topics.get(t)
    }

    pub fn topics(&self) -> impl Iterator<Item = &Topic> {
        self.topics.values()
    }

    /// Display label, falling back to the id for topics outside the ontology.
    pub fn label_of<'a>(&'a self, t: &'a TopicId) -> &'a str {
        self.topics.get(t).map(|x| x.label.as_str()).unwrap_or(t.as_str())
    }

    pub fn parents(&self, t: &TopicId) -> impl Iterator<Item = &TopicId> {
        self.parents.get(t).into_iter().flatten()
    }

    pub fn children(&self, t: &TopicId) -> impl Iterator<Item = &TopicId> {
        self.children.get(t).into_iter().flatten()
    }

    pub fn contributes_to(&self) -> impl Iterator<Item = &(TopicId, TopicId)> {
        self.contributes_to.iter()
    }

    /// Alias string → canonical topics carrying it.
    pub fn label_index(&self) -> &BTreeMap<String, BTreeSet<TopicId>> {
        &self.label_index
    }

    /// All transitive super-topics of `t`, excluding `t`.
    pub fn super_topics(&self, t: &TopicId) -> Result<BTreeSet<TopicId>, OntologyError> {
        if !self.contains(t) {
            return Err(OntologyError::UnknownTopic(t.to_string()));
        }
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<&TopicId> = self.parents(t).collect();
        while let Some(p) = queue.pop_front() {
            if seen.insert(p.clone()) {
                queue.extend(self.parents(p));
            }
        }
        Ok(seen)
    }

    /// Canonical topics whose aliases match `s` after normalization.
    pub fn resolve_label(&self, s: &str) -> BTreeSet<TopicId> {
        self.label_index.get(&normalize_label(s)).cloned().unwrap_or_default()
    }

    pub fn to_file(&self) -> OntologyFile {
        let mut file = OntologyFile::default();
        for topic in self.topics.values() {
            file.topics.push(TopicEntry { id: topic.id.to_string(), label: topic.label.clone() });
            for (member, label) in &topic.merged {
                file.topics.push(TopicEntry { id: member.to_string(), label: label.clone() });
                file.relations.push(RelationEntry {
                    kind: RelationType::RelatedEquivalent,
                    source: topic.id.to_string(),
                    target: member.to_string(),
                });
            }
        }
        for (sup, subs) in &self.children {
            for sub in subs {
                file.relations.push(RelationEntry {
                    kind: RelationType::SuperTopicOf,
                    source: sup.to_string(),
                    target: sub.to_string(),
                });
            }
        }
        for (s, t) in &self.contributes_to {
            file.relations.push(RelationEntry {
                kind: RelationType::ContributesTo,
                source: s.to_string(),
                target: t.to_string(),
            });
        }
        file
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("ontology serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tid(s: &str) -> TopicId {
        TopicId::new(s).unwrap()
    }

    fn onto(topics: &[&str], rels: &[(&str, &str, &str)]) -> Result<Ontology, OntologyError> {
        let topics: Vec<_> = topics
            .iter()
            .map(|t| serde_json::json!({"id": t, "label": t}))
            .collect();
        let relations: Vec<_> = rels
            .iter()
            .map(|(k, s, t)| serde_json::json!({"type": k, "source": s, "target": t}))
            .collect();
        Ontology::from_json(&serde_json::json!({"topics": topics, "relations": relations}).to_string())
    }

    fn chain() -> Ontology {
        onto(
            &["computer science", "artificial intelligence", "machine learning", "neural networks"],
            &[
                ("superTopicOf", "computer science", "artificial intelligence"),
                ("superTopicOf", "artificial intelligence", "machine learning"),
                ("superTopicOf", "machine learning", "neural networks"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn minimal_hierarchy() {
        let o = onto(&["a", "b"], &[("superTopicOf", "a", "b")]).unwrap();
        assert_eq!(o.parents(&tid("b")).cloned().collect::<Vec<_>>(), vec![tid("a")]);
        assert_eq!(o.children(&tid("a")).cloned().collect::<Vec<_>>(), vec![tid("b")]);
    }

    #[test]
    fn two_cycle_is_rejected() {
        let err = onto(&["a", "b"], &[("superTopicOf", "a", "b"), ("superTopicOf", "b", "a")]).unwrap_err();
        match err {
            OntologyError::Cycle { path } => {
                assert_eq!(path.first(), path.last());
                assert_eq!(path.len(), 3);
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn longer_cycle_reports_path() {
        let err = onto(
            &["a", "b", "c", "d"],
            &[
                ("superTopicOf", "d", "a"),
                ("superTopicOf", "a", "b"),
                ("superTopicOf", "b", "c"),
                ("superTopicOf", "c", "a"),
            ],
        )
        .unwrap_err();
        let OntologyError::Cycle { path } = err else { panic!() };
        assert_eq!(path, vec![tid("a"), tid("b"), tid("c"), tid("a")]);
    }

    #[test]
    fn dangling_reference() {
        let err = onto(&["a"], &[("superTopicOf", "a", "zzz")]).unwrap_err();
        assert!(matches!(err, OntologyError::DanglingRef { ref id, .. } if id == "zzz"));
    }

    #[test]
    fn malformed_json() {
        assert!(matches!(Ontology::from_json("{\"topics\": 3}"), Err(OntologyError::Parse(_))));
        assert!(matches!(Ontology::from_json("{\"topics\":[{\"id\":\"  \",\"label\":\"x\"}]}"), Err(OntologyError::Parse(_))));
    }

    #[test]
    fn equivalence_picks_smallest_id() {
        let o = onto(
            &["ontology matching", "ontology mapping"],
            &[("relatedEquivalent", "ontology matching", "ontology mapping")],
        )
        .unwrap();
        assert_eq!(o.len(), 1);
        let t = o.topic(&tid("ontology mapping")).unwrap();
        assert!(t.aliases.contains("ontology matching"));
        assert_eq!(o.resolve_label("Ontology Matching"), BTreeSet::from([tid("ontology mapping")]));
        assert_eq!(o.resolve_label("ontology mapping"), BTreeSet::from([tid("ontology mapping")]));
    }

    #[test]
    fn relations_follow_merged_members() {
        let o = onto(
            &["semantic web", "ontology matching", "ontology mapping"],
            &[
                ("superTopicOf", "semantic web", "ontology matching"),
                ("relatedEquivalent", "ontology mapping", "ontology matching"),
            ],
        )
        .unwrap();
        assert_eq!(o.super_topics(&tid("ontology mapping")).unwrap(), BTreeSet::from([tid("semantic web")]));
    }

    #[test]
    fn resolve_normalizes_input() {
        let o = onto(&["semantic web"], &[]).unwrap();
        assert_eq!(o.resolve_label("  Semantic   Web "), BTreeSet::from([tid("semantic web")]));
        assert!(o.resolve_label("unknown").is_empty());
    }

    #[test]
    fn ambiguous_alias_resolves_to_both_classes() {
        let text = serde_json::json!({
            "topics": [
                {"id": "java island", "label": "Java"},
                {"id": "java language", "label": "Java"}
            ],
            "relations": []
        });
        let o = Ontology::from_json(&text.to_string()).unwrap();
        let hits = o.resolve_label("java");
        assert_eq!(hits.len(), 2);
        assert_eq!(hits, BTreeSet::from([tid("java island"), tid("java language")]));
    }

    #[test]
    fn super_topics_of_chain() {
        let o = chain();
        assert_eq!(
            o.super_topics(&tid("Neural Networks")).unwrap(),
            BTreeSet::from([tid("machine learning"), tid("artificial intelligence"), tid("computer science")])
        );
        assert!(o.super_topics(&tid("computer science")).unwrap().is_empty());
        assert!(matches!(o.super_topics(&tid("biology")), Err(OntologyError::UnknownTopic(_))));
    }

    #[test]
    fn contributes_to_is_kept() {
        let o = onto(&["a", "b"], &[("contributesTo", "a", "b")]).unwrap();
        assert_eq!(o.contributes_to().count(), 1);
        assert_eq!(o.parents(&tid("b")).count(), 0);
    }

    #[test]
    fn super_topic_inside_equivalence_class_is_a_cycle() {
        let err = onto(&["a", "b"], &[("relatedEquivalent", "a", "b"), ("superTopicOf", "a", "b")]).unwrap_err();
        assert!(matches!(err, OntologyError::Cycle { .. }));
    }

    #[test]
    fn serialization_round_trip() {
        let text = serde_json::json!({
            "topics": [
                {"id": "semantic web", "label": "Semantic Web"},
                {"id": "ontology matching", "label": "Ontology Matching"},
                {"id": "ontology mapping", "label": "Ontology Mapping"},
                {"id": "linked data", "label": "Linked Data"}
            ],
            "relations": [
                {"type": "superTopicOf", "source": "semantic web", "target": "linked data"},
                {"type": "superTopicOf", "source": "semantic web", "target": "ontology matching"},
                {"type": "relatedEquivalent", "source": "ontology matching", "target": "ontology mapping"},
                {"type": "contributesTo", "source": "linked data", "target": "ontology mapping"}
            ]
        });
        let first = Ontology::from_json(&text.to_string()).unwrap();
        let second = Ontology::from_json(&first.to_json()).unwrap();
        assert_eq!(first, second);
        assert_eq!(second.to_json(), first.to_json());
    }
}
