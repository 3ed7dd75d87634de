//! Text, CSV and JSON renderings of series, onsets and rankings.

use std::fmt::Write as _;
use std::io::{self, Write};

use hum_core::{DetectionSeries, OnsetSequence, RankedResult};
use serde::Serialize;

/// `time_seconds,value` rows with a header.
pub fn write_series_csv<W: Write>(series: &DetectionSeries, mut out: W) -> io::Result<()> {
    writeln!(out, "time_seconds,value")?;
    for (t, v) in series.times().iter().zip(series.values()) {
        writeln!(out, "{t},{v}")?;
    }
    Ok(())
}

/// One time per line, six decimals.
pub fn onsets_to_text(onsets: &OnsetSequence) -> String {
    let mut s = String::new();
    for t in onsets.times() {
        let _ = writeln!(s, "{t:.6}");
    }
    s
}

pub fn onsets_to_json(onsets: &OnsetSequence) -> String {
    let mut s = serde_json::to_string(onsets.times()).expect("finite numbers serialize");
    s.push('\n');
    s
}

#[derive(Debug, thiserror::Error)]
pub enum ParseOnsetsError {
    #[error("invalid JSON onset list: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {text:?} is not a number")]
    Number { line: usize, text: String },
}

/// Reads onset times from either a JSON array or whitespace-separated
/// numbers. Lines starting with `#` are ignored in the plain form.
pub fn parse_onsets(text: &str) -> Result<Vec<f64>, ParseOnsetsError> {
    if text.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(text)?);
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        for word in line.split_whitespace() {
            let v = word.parse::<f64>().map_err(|_| ParseOnsetsError::Number {
                line: i + 1,
                text: word.to_owned(),
            })?;
            out.push(v);
        }
    }
    Ok(out)
}

/// Aligned `rank id title score` table; entries close to the best score
/// are marked with `*`.
pub fn ranking_table(result: &RankedResult) -> String {
    let id_w = result.entries.iter().map(|e| e.id.chars().count()).max().unwrap_or(0).max(2);
    let title_w = result
        .entries
        .iter()
        .map(|e| e.title.chars().count())
        .max()
        .unwrap_or(0)
        .max(5);
    let mut s = String::new();
    let _ = writeln!(s, "{:>4}  {:<id_w$}  {:<title_w$}  {:>8}", "rank", "id", "title", "score");
    for (i, e) in result.entries.iter().enumerate() {
        let mark = if e.close_to_best { " *" } else { "" };
        let _ = writeln!(
            s,
            "{:>4}  {:<id_w$}  {:<title_w$}  {:>8.4}{mark}",
            i + 1,
            e.id,
            e.title,
            e.score
        );
    }
    for skip in &result.skipped {
        let _ = writeln!(s, "skipped {}: {}", skip.id, skip.reason);
    }
    s
}

#[derive(Serialize)]
struct EntryRepr<'a> {
    rank: usize,
    id: &'a str,
    title: &'a str,
    score: f64,
    alpha: f64,
    beta: f64,
    close_to_best: bool,
}

#[derive(Serialize)]
struct SkipRepr<'a> {
    id: &'a str,
    reason: String,
}

#[derive(Serialize)]
struct RankingRepr<'a> {
    entries: Vec<EntryRepr<'a>>,
    skipped: Vec<SkipRepr<'a>>,
}

pub fn ranking_json(result: &RankedResult) -> String {
    let repr = RankingRepr {
        entries: result
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| EntryRepr {
                rank: i + 1,
                id: &e.id,
                title: &e.title,
                score: e.score,
                alpha: e.alpha,
                beta: e.beta,
                close_to_best: e.close_to_best,
            })
            .collect(),
        skipped: result
            .skipped
            .iter()
            .map(|s| SkipRepr {
                id: &s.id,
                reason: s.reason.to_string(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&repr).expect("ranking serializes");
    s.push('\n');
    s
}
