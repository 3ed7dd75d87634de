//! Song records, the onset database and ranking of candidates.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::matching::correlative_match;
use crate::{Error, OnsetSequence, Result, TimeUnit};

/// Default score window for flagging candidates close to the best one.
pub const DEFAULT_CLOSENESS: f64 = 0.05;

/// Reference onsets of one song, in beats.
#[derive(Debug, Clone, PartialEq)]
pub struct SongRecord {
    id: String,
    title: String,
    onsets_beats: OnsetSequence,
}

impl SongRecord {
    /// Validates that the onsets are in beats, strictly increasing and at
    /// least two long.
    pub fn new(id: String, title: String, onsets_beats: Vec<f64>) -> Result<Self> {
        let onsets = OnsetSequence::beats(onsets_beats)?;
        if onsets.len() < 2 {
            return Err(Error::TooFewOnsets {
                id,
                len: onsets.len(),
            });
        }
        Ok(Self {
            id,
            title,
            onsets_beats: onsets,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn onsets(&self) -> &OnsetSequence {
        &self.onsets_beats
    }
}

/// A collection of songs with pairwise distinct ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Database {
    records: Vec<SongRecord>,
}

impl Database {
    pub fn new(records: Vec<SongRecord>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[SongRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&SongRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    /// Appends a record, rejecting a duplicate id.
    pub fn insert(&mut self, record: SongRecord) -> Result<()> {
        if self.get(&record.id).is_some() {
            return Err(Error::DuplicateId(record.id));
        }
        self.records.push(record);
        Ok(())
    }

    pub fn into_records(self) -> Vec<SongRecord> {
        self.records
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub id: String,
    pub title: String,
    pub score: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Score is within the closeness window of the best score.
    pub close_to_best: bool,
}

/// A record that could not be scored.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedRecord {
    pub id: String,
    pub reason: Error,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedResult {
    /// Sorted by score descending, ties by ascending id.
    pub entries: Vec<RankedEntry>,
    pub skipped: Vec<SkippedRecord>,
}

/// Sorts entries by score descending, then id ascending.
pub fn sort_entries(entries: &mut [RankedEntry]) {
    entries.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
}

/// Scores `query` (seconds) against every record and keeps the best `top_k`.
///
/// Records that cannot be matched are listed in [`RankedResult::skipped`].
/// Every kept entry whose score is at least `best - closeness` is flagged.
pub fn rank(db: &Database, query: &OnsetSequence, top_k: usize, closeness: f64) -> Result<RankedResult> {
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    if query.len() < 2 {
        return Err(Error::TooShort {
            len: query.len(),
            min: 2,
        });
    }
    let query = if query.unit() == TimeUnit::Seconds {
        query.clone()
    } else {
        OnsetSequence::seconds(query.times().to_vec())?
    };

    let mut result = RankedResult::default();
    for record in db.records() {
        match correlative_match(&query, record.onsets()) {
            Ok(sim) => result.entries.push(RankedEntry {
                id: record.id.clone(),
                title: record.title.clone(),
                score: sim.score,
                alpha: sim.alpha,
                beta: sim.beta,
                close_to_best: false,
            }),
            Err(reason) => result.skipped.push(SkippedRecord {
                id: record.id.clone(),
                reason,
            }),
        }
    }
    sort_entries(&mut result.entries);
    result.entries.truncate(top_k);
    flag_close(&mut result.entries, closeness);
    Ok(result)
}

fn flag_close(entries: &mut [RankedEntry], closeness: f64) {
    if let Some(best) = entries.first().map(|e| e.score) {
        for e in entries.iter_mut() {
            e.close_to_best = e.score >= best - closeness;
        }
    }
}
