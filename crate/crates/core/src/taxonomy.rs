//! The displayed topic tree: classified topics arranged by the ontology hierarchy.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classifier::BookClassification;
use crate::ontology::{Ontology, TopicId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaxonomyNode {
    pub topic: TopicId,
    pub label: String,
    pub chapter_count: usize,
    /// Kept only to connect a qualifying descendant to its root.
    #[serde(default)]
    pub structural: bool,
    pub children: Vec<TaxonomyNode>,
}

impl TaxonomyNode {
    /// Pre-order walk over this subtree.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a TaxonomyNode, Option<&'a TaxonomyNode>)) {
        fn go<'a>(
            n: &'a TaxonomyNode,
            parent: Option<&'a TaxonomyNode>,
            visit: &mut impl FnMut(&'a TaxonomyNode, Option<&'a TaxonomyNode>),
        ) {
            visit(n, parent);
            for c in &n.children {
                go(c, Some(n), visit);
            }
        }
        go(self, None, visit);
    }
}

pub fn walk_forest<'a>(forest: &'a [TaxonomyNode], mut visit: impl FnMut(&'a TaxonomyNode, Option<&'a TaxonomyNode>)) {
    for root in forest {
        root.walk(&mut visit);
    }
}

fn by_count<'a>(counts: &BTreeMap<TopicId, usize>, ids: impl Iterator<Item = &'a TopicId>) -> Vec<&'a TopicId> {
    let mut v: Vec<&TopicId> = ids.filter(|t| counts.contains_key(*t)).collect();
    v.sort_by(|a, b| counts[*b].cmp(&counts[*a]).then_with(|| a.cmp(b)));
    v.dedup();
    v
}

/// Classified topics joined by direct super-topic edges. A topic with several
/// classified parents is repeated under each of them.
pub fn build_taxonomy(bc: &BookClassification, ontology: &Ontology) -> Vec<TaxonomyNode> {
    let counts = &bc.topic_chapter_count;
    fn node(t: &TopicId, counts: &BTreeMap<TopicId, usize>, o: &Ontology) -> TaxonomyNode {
        TaxonomyNode {
            topic: t.clone(),
            label: o.label_of(t).to_string(),
            chapter_count: counts[t],
            structural: false,
            children: by_count(counts, o.children(t)).into_iter().map(|c| node(c, counts, o)).collect(),
        }
    }
    let roots = by_count(counts, counts.keys().filter(|t| !ontology.parents(t).any(|p| counts.contains_key(p))));
    roots.into_iter().map(|t| node(t, counts, ontology)).collect()
}

/// Nodes with at least `min_chapters` chapters, plus the ancestors needed to
/// reach them, which are flagged as structural.
pub fn filter_taxonomy(forest: &[TaxonomyNode], min_chapters: usize) -> Vec<TaxonomyNode> {
    fn keep(n: &TaxonomyNode, k: usize) -> Option<TaxonomyNode> {
        let children: Vec<TaxonomyNode> = n.children.iter().filter_map(|c| keep(c, k)).collect();
        let qualifies = n.chapter_count >= k;
        if !qualifies && children.is_empty() {
            return None;
        }
        Some(TaxonomyNode {
            topic: n.topic.clone(),
            label: n.label.clone(),
            chapter_count: n.chapter_count,
            structural: !qualifies,
            children,
        })
    }
    forest.iter().filter_map(|n| keep(n, min_chapters)).collect()
}
