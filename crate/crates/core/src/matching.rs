//! Aligning detected onsets with reference onsets.
//!
//! [`subset_match`] pairs query and reference onsets that are mutually
//! nearest to each other; unpaired query onsets are false positives and
//! unpaired reference onsets false negatives. [`correlative_match`] searches
//! affine time maps (offset `alpha`, scale `beta`) anchored on pairs of query
//! onsets and scores each one by the Pearson correlation of the matched
//! pairs times the correction factor `L^2 / (m*n)`.

use alloc::vec::Vec;

use crate::{Error, OnsetSequence, Result, TimeUnit};

/// Outcome of subset matching one query against one reference.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Query onsets that found a mutual nearest reference onset.
    pub matched_entries: OnsetSequence,
    /// Reference onsets paired with `matched_entries`, element by element.
    pub detected_onsets: OnsetSequence,
    /// `(query index, reference index)` of every pair, increasing in both.
    pub pairs: Vec<(usize, usize)>,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl MatchResult {
    /// Number of matched pairs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// For every element of `from`, the index of its nearest element in `to`.
/// Both slices are sorted; equal distances go to the earlier element.
fn nearest_indices(from: &[f64], to: &[f64]) -> Vec<usize> {
    let mut out = Vec::with_capacity(from.len());
    let mut p = 0usize;
    for &x in from {
        while p + 1 < to.len() && to[p + 1] <= x {
            p += 1;
        }
        // to[p] is the last element <= x, or the first element if none is.
        let best = if p + 1 < to.len() && to[p] <= x && to[p + 1] - x < x - to[p] {
            p + 1
        } else {
            p
        };
        out.push(best);
    }
    out
}

fn mutual_pairs(query: &[f64], reference: &[f64]) -> Vec<(usize, usize)> {
    let q2r = nearest_indices(query, reference);
    let r2q = nearest_indices(reference, query);
    q2r.iter()
        .enumerate()
        .filter(|&(i, &j)| r2q[j] == i)
        .map(|(i, &j)| (i, j))
        .collect()
}

fn result_from_pairs(
    query: &OnsetSequence,
    reference: &OnsetSequence,
    pairs: Vec<(usize, usize)>,
) -> MatchResult {
    let (q, r) = (query.times(), reference.times());
    let matched = pairs.iter().map(|&(i, _)| q[i]).collect();
    let detected = pairs.iter().map(|&(_, j)| r[j]).collect();
    MatchResult {
        matched_entries: OnsetSequence::from_sorted(matched, query.unit()),
        detected_onsets: OnsetSequence::from_sorted(detected, reference.unit()),
        false_positives: q.len() - pairs.len(),
        false_negatives: r.len() - pairs.len(),
        pairs,
    }
}

/// Mutual-nearest-neighbor matching of two sequences in the same unit.
///
/// Runs in `O(n + m)` by walking both sorted sequences.
pub fn subset_match(query: &OnsetSequence, reference: &OnsetSequence) -> Result<MatchResult> {
    if query.is_empty() || reference.is_empty() {
        return Err(Error::EmptySequence);
    }
    if query.unit() != reference.unit() {
        return Err(Error::UnitMismatch);
    }
    let pairs = mutual_pairs(query.times(), reference.times());
    Ok(result_from_pairs(query, reference, pairs))
}

/// Pearson product-moment correlation; 0 when either side is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::TooShort { len: a.len(), min: 2 });
    }
    Ok(pearson_unchecked(a, b))
}

fn pearson_unchecked(a: &[f64], b: &[f64]) -> f64 {
    // Two points are always perfectly (anti)correlated. Returning the exact
    // value keeps ties between such cells from being decided by rounding.
    if a.len() == 2 {
        let s = (a[1] - a[0]) * (b[1] - b[0]);
        return if s > 0.0 {
            1.0
        } else if s < 0.0 {
            -1.0
        } else {
            0.0
        };
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    (sab / libm::sqrt(saa * sbb)).clamp(-1.0, 1.0)
}

/// Best alignment of a query against a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityResult {
    /// Pearson correlation of the matched pairs times `L^2 / (m*n)`.
    pub score: f64,
    /// Offset of the map `reference -> alpha + beta * reference`, in query units.
    pub alpha: f64,
    /// Scale of the same map, query units per reference unit.
    pub beta: f64,
    /// Matched query onsets at the best alignment.
    pub predicted_onsets: OnsetSequence,
    /// Subset matching of the query against the mapped reference. The
    /// `detected_onsets` hold the reference onsets in their own unit.
    pub matching: MatchResult,
    /// 0-based anchor indices into the longer of the two sequences (the
    /// query unless it is shorter than the reference).
    pub anchors: (usize, usize),
}

/// Score of one anchor cell, with the matched pairs it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct CellScore {
    pub score: f64,
    pub alpha: f64,
    pub beta: f64,
    pub pairs: Vec<(usize, usize)>,
}

/// Evaluates a single anchor cell: `long[i]` and `long[j]` are taken as the
/// images of the first and last `short` onsets.
///
/// Returns `None` when the cell is infeasible (`j - i < m - 1`).
pub fn score_cell(long: &[f64], short: &[f64], i: usize, j: usize) -> Option<CellScore> {
    let (n, m) = (long.len(), short.len());
    if j >= n || j < i || j - i < m - 1 {
        return None;
    }
    let beta = (long[j] - long[i]) / (short[m - 1] - short[0]);
    let alpha = long[i] - beta * short[0];
    let scaled: Vec<f64> = short.iter().map(|&s| alpha + beta * s).collect();
    let pairs = mutual_pairs(long, &scaled);
    let l = pairs.len();
    let score = if l < 2 {
        0.0
    } else {
        let a: Vec<f64> = pairs.iter().map(|&(p, _)| long[p]).collect();
        let b: Vec<f64> = pairs.iter().map(|&(_, q)| short[q]).collect();
        pearson_unchecked(&a, &b) * (l * l) as f64 / (m * n) as f64
    };
    Some(CellScore {
        score,
        alpha,
        beta,
        pairs,
    })
}

/// Searches every feasible anchor cell of `long` (length n) against `short`
/// (length m <= n). Ties keep the smallest `i`, then the smallest `j`.
fn best_cell(long: &[f64], short: &[f64]) -> Option<((usize, usize), CellScore)> {
    let (n, m) = (long.len(), short.len());
    let mut best: Option<((usize, usize), CellScore)> = None;
    for i in 0..=(n - m) {
        for j in (m - 1)..n {
            let Some(cell) = score_cell(long, short, i, j) else {
                continue;
            };
            if best.as_ref().is_none_or(|(_, b)| cell.score > b.score) {
                best = Some(((i, j), cell));
            }
        }
    }
    best
}

/// Correlative matching of a query (seconds) against a reference (beats).
///
/// When the query is shorter than the reference the roles are swapped for
/// the search; `alpha` and `beta` are always reported for the map from the
/// reference into query time.
pub fn correlative_match(
    query: &OnsetSequence,
    reference: &OnsetSequence,
) -> Result<SimilarityResult> {
    for s in [query, reference] {
        if s.len() < 2 {
            return Err(Error::TooShort { len: s.len(), min: 2 });
        }
    }
    let (q, r) = (query.times(), reference.times());
    let swapped = q.len() < r.len();
    let (long, short) = if swapped { (r, q) } else { (q, r) };
    let ((i, j), cell) = best_cell(long, short).ok_or(Error::NoFeasibleAlignment)?;

    let (alpha, beta, pairs) = if swapped {
        let pairs = cell.pairs.iter().map(|&(a, b)| (b, a)).collect();
        (-cell.alpha / cell.beta, 1.0 / cell.beta, pairs)
    } else {
        (cell.alpha, cell.beta, cell.pairs)
    };
    let matching = result_from_pairs(query, reference, pairs);
    Ok(SimilarityResult {
        score: cell.score,
        alpha,
        beta,
        predicted_onsets: with_unit(&matching.matched_entries, query.unit()),
        matching,
        anchors: (i, j),
    })
}

fn with_unit(s: &OnsetSequence, unit: TimeUnit) -> OnsetSequence {
    OnsetSequence::from_sorted(s.times().to_vec(), unit)
}
