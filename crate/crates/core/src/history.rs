//! Append-only store of editor-approved annotations, one JSON object per line.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::ontology::TopicId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddedTopic {
    pub topic: TopicId,
    pub parent: TopicId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnnotationRecord {
    pub conf_series_id: String,
    pub year: i32,
    #[serde(default)]
    pub volumes: Vec<String>,
    pub selected_topics: Vec<TopicId>,
    #[serde(default)]
    pub renames: BTreeMap<TopicId, String>,
    #[serde(default)]
    pub added_topics: Vec<AddedTopic>,
    #[serde(default)]
    pub removed_topics: Vec<TopicId>,
    #[serde(default)]
    pub selected_pmcs: Vec<String>,
    pub submitted_at: DateTime<Utc>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("invalid annotation record: {0}")]
pub struct ValidationError(pub String);

impl AnnotationRecord {
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.conf_series_id.trim().is_empty() {
            return Err(ValidationError("confSeriesId is empty".into()));
        }
        if self.selected_topics.is_empty() {
            return Err(ValidationError("selectedTopics is empty".into()));
        }
        let known: BTreeSet<&TopicId> =
            self.selected_topics.iter().chain(self.added_topics.iter().map(|a| &a.topic)).collect();
        for (topic, name) in &self.renames {
            if !known.contains(topic) {
                return Err(ValidationError(format!("rename of {topic}, which is neither selected nor added")));
            }
            if name.trim().is_empty() {
                return Err(ValidationError(format!("empty new name for {topic}")));
            }
        }
        if self.selected_pmcs.iter().any(|c| c.trim().is_empty()) {
            return Err(ValidationError("empty code in selectedPmcs".into()));
        }
        Ok(())
    }

    /// Topics shown as used by this edition: selected or added, and not removed.
    pub fn used_topics(&self) -> BTreeSet<&TopicId> {
        let removed: BTreeSet<&TopicId> = self.removed_topics.iter().collect();
        self.selected_topics
            .iter()
            .chain(self.added_topics.iter().map(|a| &a.topic))
            .filter(|t| !removed.contains(t))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredRecord {
    pub receipt: u64,
    #[serde(flatten)]
    pub record: AnnotationRecord,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("annotation store {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("annotation store {path}, line {line}: {message}")]
    Corrupt { path: String, line: usize, message: String },
    #[error("annotation store lock poisoned")]
    Poisoned,
}

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug)]
pub struct AnnotationStore {
    path: Option<PathBuf>,
    records: RwLock<Vec<StoredRecord>>,
    writer: Mutex<Option<File>>,
}

impl AnnotationStore {
    /// Open (creating if needed) a JSON-lines store and replay its contents.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let shown = path.display().to_string();
        let io = |source| StoreError::Io { path: shown.clone(), source };
        let file = OpenOptions::new().create(true).read(true).append(true).open(&path).map_err(io)?;
        let mut records = Vec::new();
        for (i, line) in BufReader::new(&file).lines().enumerate() {
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: StoredRecord = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
                path: shown.clone(),
                line: i + 1,
                message: e.to_string(),
            })?;
            if records.last().is_some_and(|prev: &StoredRecord| prev.receipt >= rec.receipt) {
                return Err(StoreError::Corrupt {
                    path: shown.clone(),
                    line: i + 1,
                    message: format!("receipt {} is not increasing", rec.receipt),
                });
            }
            records.push(rec);
        }
        log::debug!("replayed {} annotation records from {shown}", records.len());
        Ok(AnnotationStore { path: Some(path), records: RwLock::new(records), writer: Mutex::new(Some(file)) })
    }

    /// A store that lives only as long as the process.
    pub fn in_memory() -> Self {
        AnnotationStore { path: None, records: RwLock::new(Vec::new()), writer: Mutex::new(None) }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Validate, append durably and return the new receipt.
    pub fn record_annotation(&self, rec: AnnotationRecord) -> Result<u64, RecordError> {
        rec.validate()?;
        let mut writer = self.writer.lock().map_err(|_| StoreError::Poisoned)?;
        let receipt = {
            let records = self.records.read().map_err(|_| StoreError::Poisoned)?;
            records.last().map_or(1, |r| r.receipt + 1)
        };
        let stored = StoredRecord { receipt, record: rec };
        if let Some(file) = writer.as_mut() {
            let shown = self.path.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
            let mut line = serde_json::to_string(&stored).expect("records serialize");
            line.push('\n');
            file.write_all(line.as_bytes())
                .and_then(|_| file.sync_data())
                .map_err(|source| StoreError::Io { path: shown, source })?;
        }
        self.records.write().map_err(|_| StoreError::Poisoned)?.push(stored);
        Ok(receipt)
    }

    /// Latest record of a series with `year < before_year` (any year when absent);
    /// equal years resolve to the later submission.
    pub fn previous_annotations(
        &self,
        conf_series_id: &str,
        before_year: Option<i32>,
    ) -> Result<Option<StoredRecord>, StoreError> {
        let records = self.records.read().map_err(|_| StoreError::Poisoned)?;
        Ok(records
            .iter()
            .filter(|r| r.record.conf_series_id == conf_series_id)
            .filter(|r| before_year.is_none_or(|y| r.record.year < y))
            .max_by_key(|r| (r.record.year, r.receipt))
            .cloned())
    }

    /// Every record of a series in submission order.
    pub fn history(&self, conf_series_id: &str) -> Result<Vec<StoredRecord>, StoreError> {
        let records = self.records.read().map_err(|_| StoreError::Poisoned)?;
        Ok(records.iter().filter(|r| r.record.conf_series_id == conf_series_id).cloned().collect())
    }

    pub fn len(&self) -> usize {
        self.records.read().map(|r| r.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn all(&self) -> Result<Vec<StoredRecord>, StoreError> {
        Ok(self.records.read().map_err(|_| StoreError::Poisoned)?.clone())
    }
}
