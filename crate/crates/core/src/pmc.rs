//! Publisher product market codes: a three-level mono-hierarchy mapped onto ontology topics.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::BookClassification;
use crate::ontology::{Ontology, TopicId};

#[derive(Debug, thiserror::Error)]
pub enum PmcError {
    #[error("cannot read scheme: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed scheme: {0}")]
    Parse(String),
    #[error("invalid code hierarchy: {0}")]
    Hierarchy(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PmcCode {
    pub code: String,
    pub label: String,
    pub level: u8,
    #[serde(default)]
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingEntry {
    pub code: String,
    pub topic: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeFile {
    pub codes: Vec<PmcCode>,
    #[serde(default)]
    pub mapping: Vec<MappingEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PmcScheme {
    codes: BTreeMap<String, PmcCode>,
    topic_to_pmc: BTreeMap<TopicId, BTreeSet<String>>,
}

/// An inferred code with the number of chapters its subtree covers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PmcAssignment {
    pub code: String,
    pub label: String,
    pub level: u8,
    pub chapter_count: usize,
}

impl PmcScheme {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PmcError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_json(text: &str) -> Result<Self, PmcError> {
        let file: SchemeFile = serde_json::from_str(text).map_err(|e| PmcError::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn from_file(file: SchemeFile) -> Result<Self, PmcError> {
        let mut codes: BTreeMap<String, PmcCode> = BTreeMap::new();
        for c in file.codes {
            if c.code.trim().is_empty() {
                return Err(PmcError::Parse("empty code".into()));
            }
            if let Some(prev) = codes.get(&c.code) {
                return Err(if prev.parent != c.parent {
                    PmcError::Hierarchy(format!("code {} has more than one parent", c.code))
                } else {
                    PmcError::Parse(format!("duplicate code {}", c.code))
                });
            }
            codes.insert(c.code.clone(), c);
        }
        for c in codes.values() {
            if !(1..=3).contains(&c.level) {
                return Err(PmcError::Hierarchy(format!("code {} has level {}", c.code, c.level)));
            }
            match (&c.parent, c.level) {
                (None, 1) => {}
                (None, _) => {
                    return Err(PmcError::Hierarchy(format!("level-{} code {} has no parent", c.level, c.code)));
                }
                (Some(p), 1) => {
                    return Err(PmcError::Hierarchy(format!("root code {} has parent {p}", c.code)));
                }
                (Some(p), level) => {
                    let parent = codes
                        .get(p)
                        .ok_or_else(|| PmcError::Hierarchy(format!("code {} has unknown parent {p}", c.code)))?;
                    if parent.level + 1 != level {
                        return Err(PmcError::Hierarchy(format!(
                            "code {} (level {level}) has parent {p} at level {}",
                            c.code, parent.level
                        )));
                    }
                }
            }
        }
        // strict level decrease along parent links already rules out cycles

        let mut topic_to_pmc: BTreeMap<TopicId, BTreeSet<String>> = BTreeMap::new();
        for m in file.mapping {
            if !codes.contains_key(&m.code) {
                return Err(PmcError::Parse(format!("mapping references unknown code {}", m.code)));
            }
            let topic = TopicId::new(&m.topic)
                .ok_or_else(|| PmcError::Parse(format!("mapping for {} has an empty topic", m.code)))?;
            topic_to_pmc.entry(topic).or_default().insert(m.code);
        }
        Ok(PmcScheme { codes, topic_to_pmc })
    }

    /// Rewrite mapped topics to their canonical ontology ids.
    pub fn canonicalize(mut self, ontology: &Ontology) -> Self {
        let mut remapped: BTreeMap<TopicId, BTreeSet<String>> = BTreeMap::new();
        for (topic, codes) in std::mem::take(&mut self.topic_to_pmc) {
            let targets = if ontology.contains(&topic) {
                BTreeSet::from([topic])
            } else {
                let resolved = ontology.resolve_label(topic.as_str());
                if resolved.is_empty() {
                    BTreeSet::from([topic])
                } else {
                    resolved
                }
            };
            for t in targets {
                remapped.entry(t).or_default().extend(codes.iter().cloned());
            }
        }
        self.topic_to_pmc = remapped;
        self
    }

    pub fn code(&self, code: &str) -> Option<&PmcCode> {
        self.codes.get(code)
    }

    pub fn codes(&self) -> impl Iterator<Item = &PmcCode> {
        self.codes.values()
    }

    pub fn mapped_codes(&self, topic: &TopicId) -> impl Iterator<Item = &String> {
        self.topic_to_pmc.get(topic).into_iter().flatten()
    }

    pub fn mapping(&self) -> &BTreeMap<TopicId, BTreeSet<String>> {
        &self.topic_to_pmc
    }

    /// `code` followed by its ancestors up to the root.
    pub fn lineage<'a>(&'a self, code: &'a str) -> Vec<&'a str> {
        let mut out = Vec::new();
        let mut cur = self.codes.get(code);
        while let Some(c) = cur {
            out.push(c.code.as_str());
            cur = c.parent.as_deref().and_then(|p| self.codes.get(p));
        }
        out
    }
}

/// Codes subsuming the classified topics, each with the number of distinct chapters
/// covered by topics mapped anywhere in its subtree.
pub fn infer_pmcs(bc: &BookClassification, scheme: &PmcScheme) -> Vec<PmcAssignment> {
    let mut covered: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    for (i, ch) in bc.per_chapter.iter().enumerate() {
        for topic in ch.topics.keys() {
            for code in scheme.mapped_codes(topic) {
                for c in scheme.lineage(code) {
                    covered.entry(c).or_default().insert(i);
                }
            }
        }
    }
    let mut out: Vec<PmcAssignment> = covered
        .into_iter()
        .map(|(code, chapters)| {
            let c = &scheme.codes[code];
            PmcAssignment {
                code: c.code.clone(),
                label: c.label.clone(),
                level: c.level,
                chapter_count: chapters.len(),
            }
        })
        .collect();
    out.sort_by(|a, b| b.chapter_count.cmp(&a.chapter_count).then_with(|| a.code.cmp(&b.code)));
    out
}
