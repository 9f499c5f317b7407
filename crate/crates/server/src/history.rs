//! Append-only query history. Each line of the backing file is one JSON
//! object holding the entry fields and the full trace.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use optlab_core::trace::OptimizationTrace;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error("history file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("history file {path}, line {line}: {message}")]
    Corrupt {
        path: String,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub query_id: String,
    pub sql: String,
    pub catalog: String,
    /// UTC, RFC 3339.
    pub timestamp: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoredEntry {
    query_id: String,
    sql: String,
    catalog: String,
    timestamp: String,
    trace: OptimizationTrace,
}

#[derive(Debug)]
pub struct HistoryStore {
    path: Option<PathBuf>,
    entries: Vec<(HistoryEntry, OptimizationTrace)>,
    last: Option<DateTime<Utc>>,
}

impl HistoryStore {
    /// A store that lives only as long as the process.
    pub fn in_memory() -> Self {
        Self {
            path: None,
            entries: Vec::new(),
            last: None,
        }
    }

    /// Opens `path`, replaying every line already in it. A missing file is
    /// an empty history.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, HistoryError> {
        let path = path.into();
        let mut store = Self {
            path: Some(path.clone()),
            ..Self::in_memory()
        };
        let file = match File::open(&path) {
            Ok(file) => file,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(store),
            Err(source) => return Err(io_error(&path, source)),
        };
        for (index, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| io_error(&path, source))?;
            if line.trim().is_empty() {
                continue;
            }
            let corrupt = |message: String| HistoryError::Corrupt {
                path: path.display().to_string(),
                line: index + 1,
                message,
            };
            let stored: StoredEntry =
                serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
            stored
                .trace
                .validate()
                .map_err(|e| corrupt(e.to_string()))?;
            let at = DateTime::parse_from_rfc3339(&stored.timestamp)
                .map_err(|e| corrupt(format!("timestamp: {e}")))?
                .with_timezone(&Utc);
            if store.last.is_some_and(|last| at < last) {
                return Err(corrupt("timestamps go backwards".into()));
            }
            store.last = Some(at);
            store.entries.push((
                HistoryEntry {
                    query_id: stored.query_id,
                    sql: stored.sql,
                    catalog: stored.catalog,
                    timestamp: stored.timestamp,
                },
                stored.trace,
            ));
        }
        Ok(store)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Records a trace under its own query id. The timestamp is the current
    /// time, clamped so the store stays in order when the clock steps back.
    pub fn append(
        &mut self,
        catalog: &str,
        trace: OptimizationTrace,
    ) -> Result<HistoryEntry, HistoryError> {
        let now = Utc::now();
        let at = self.last.map_or(now, |last| last.max(now));
        let stored = StoredEntry {
            query_id: trace.query_id.clone(),
            sql: trace.sql.clone(),
            catalog: catalog.to_string(),
            timestamp: at.to_rfc3339_opts(SecondsFormat::Micros, true),
            trace,
        };
        if let Some(path) = &self.path {
            let mut line =
                serde_json::to_string(&stored).expect("trace serialization is infallible");
            line.push('\n');
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .and_then(|mut file| file.write_all(line.as_bytes()))
                .map_err(|source| io_error(path, source))?;
        }
        let entry = HistoryEntry {
            query_id: stored.query_id,
            sql: stored.sql,
            catalog: stored.catalog,
            timestamp: stored.timestamp,
        };
        self.last = Some(at);
        self.entries.push((entry.clone(), stored.trace));
        Ok(entry)
    }

    /// Entries, newest first.
    pub fn list(&self) -> Vec<HistoryEntry> {
        self.entries.iter().rev().map(|(e, _)| e.clone()).collect()
    }

    pub fn get(&self, query_id: &str) -> Option<&OptimizationTrace> {
        self.entries
            .iter()
            .find(|(e, _)| e.query_id == query_id)
            .map(|(_, t)| t)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn io_error(path: &Path, source: std::io::Error) -> HistoryError {
    HistoryError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use optlab_core::catalog::tpch_like;
    use optlab_core::cost::CostParams;
    use optlab_core::pipeline::optimize;

    fn trace(id: &str) -> OptimizationTrace {
        optimize(
            "SELECT * FROM region r",
            &tpch_like(),
            &CostParams::default(),
            id,
        )
        .unwrap()
    }

    #[test]
    fn missing_file_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let store = HistoryStore::open(dir.path().join("h.jsonl")).unwrap();
        assert!(store.is_empty());
    }

    #[test]
    fn entries_survive_reopen_newest_first() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.jsonl");
        let mut store = HistoryStore::open(&path).unwrap();
        for id in ["a", "b", "c"] {
            store.append("tpch-like", trace(id)).unwrap();
        }
        let reopened = HistoryStore::open(&path).unwrap();
        let ids: Vec<_> = reopened.list().into_iter().map(|e| e.query_id).collect();
        assert_eq!(ids, ["c", "b", "a"]);
        assert_eq!(reopened.get("b"), Some(&trace("b")));
        assert_eq!(reopened.list(), store.list());
    }

    #[test]
    fn timestamps_never_decrease() {
        let mut store = HistoryStore::in_memory();
        let stamps: Vec<String> = (0..20)
            .map(|i| store.append("x", trace(&i.to_string())).unwrap().timestamp)
            .collect();
        assert!(stamps.windows(2).all(|w| w[0] <= w[1]));
        assert!(DateTime::parse_from_rfc3339(&stamps[0]).is_ok());
    }

    #[test]
    fn corrupt_line_is_reported_with_its_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.jsonl");
        let mut store = HistoryStore::open(&path).unwrap();
        store.append("tpch-like", trace("a")).unwrap();
        let mut file = OpenOptions::new().append(true).open(&path).unwrap();
        file.write_all(b"{\"query_id\": 1}\n").unwrap();
        match HistoryStore::open(&path) {
            Err(HistoryError::Corrupt { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
