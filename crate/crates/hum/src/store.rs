//! JSON song database.
//!
//! The file is a top-level array of objects:
//!
//! ```json
//! [{"id": "s1", "title": "Song", "onsets_beats": [0, 1, 2.5]}]
//! ```
//!
//! Loading verifies every invariant and never repairs a record.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use hum_core::{Database, SongRecord};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("record {index} ({id:?}): {source}")]
    Invalid {
        index: usize,
        id: String,
        #[source]
        source: hum_core::Error,
    },
    #[error("record {index}: duplicate id {id:?}")]
    DuplicateId { index: usize, id: String },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordRepr {
    id: String,
    title: String,
    onsets_beats: Vec<f64>,
}

/// Parses a database document.
pub fn db_from_str(text: &str) -> Result<Database, StoreError> {
    let raw: Vec<RecordRepr> = serde_json::from_str(text).map_err(|e| StoreError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut seen = HashSet::new();
    let mut records = Vec::with_capacity(raw.len());
    for (index, r) in raw.into_iter().enumerate() {
        if !seen.insert(r.id.clone()) {
            return Err(StoreError::DuplicateId { index, id: r.id });
        }
        let id = r.id.clone();
        let record = SongRecord::new(r.id, r.title, r.onsets_beats)
            .map_err(|source| StoreError::Invalid { index, id, source })?;
        records.push(record);
    }
    // Ids were checked above, so this cannot fail.
    Ok(Database::new(records).expect("ids are distinct"))
}

pub fn db_to_string(db: &Database) -> String {
    let raw: Vec<RecordRepr> = db
        .records()
        .iter()
        .map(|r| RecordRepr {
            id: r.id().to_owned(),
            title: r.title().to_owned(),
            onsets_beats: r.onsets().times().to_vec(),
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&raw).expect("records serialize");
    text.push('\n');
    text
}

pub fn db_load(path: impl AsRef<Path>) -> Result<Database, StoreError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| StoreError::Io {
        path: path.to_owned(),
        source,
    })?;
    db_from_str(&text)
}

/// Writes the whole database, replacing any existing file.
pub fn db_save(db: &Database, path: impl AsRef<Path>) -> Result<(), StoreError> {
    let path = path.as_ref();
    std::fs::write(path, db_to_string(db)).map_err(|source| StoreError::Io {
        path: path.to_owned(),
        source,
    })
}
