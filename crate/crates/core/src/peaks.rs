//! Peak picking over a detection series.
//!
//! A frame is reported as an onset when its value clears the threshold and
//! strictly exceeds every configured neighbor. After an onset the scan skips
//! ahead to the first frame more than `min_gap` seconds later, so two
//! reported onsets are never closer than that.

use alloc::vec::Vec;

use crate::detect::first_non_increasing;
use crate::{DetectionSeries, DetectorKind, Error, Result};

/// Default merge distance between two onsets, in seconds.
pub const DEFAULT_MIN_GAP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUnit {
    Seconds,
    Beats,
}

/// Strictly increasing, finite event times.
#[derive(Debug, Clone, PartialEq)]
pub struct OnsetSequence {
    times: Vec<f64>,
    unit: TimeUnit,
}

impl OnsetSequence {
    pub fn new(times: Vec<f64>, unit: TimeUnit) -> Result<Self> {
        if let Some(index) = first_non_increasing(&times) {
            return Err(Error::NonIncreasingOnsets { index });
        }
        Ok(Self { times, unit })
    }

    pub fn seconds(times: Vec<f64>) -> Result<Self> {
        Self::new(times, TimeUnit::Seconds)
    }

    pub fn beats(times: Vec<f64>) -> Result<Self> {
        Self::new(times, TimeUnit::Beats)
    }

    pub(crate) fn from_sorted(times: Vec<f64>, unit: TimeUnit) -> Self {
        debug_assert!(first_non_increasing(&times).is_none());
        Self { times, unit }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn unit(&self) -> TimeUnit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn into_times(self) -> Vec<f64> {
        self.times
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdRule {
    /// A multiple of the series mean.
    MeanScaled,
    /// The 0.75 quantile, linearly interpolated between order statistics.
    ThirdQuartile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakConfig {
    /// Stride of the scan, in series indices.
    pub hopsize: usize,
    /// Index offsets a frame must strictly exceed. Never zero.
    pub neighbors: Vec<i64>,
    pub threshold_rule: ThresholdRule,
    /// Multiplier applied to the mean under [`ThresholdRule::MeanScaled`].
    pub threshold_scale: f64,
    /// Seconds; onsets closer than this are merged into the first one.
    pub min_gap: f64,
}

impl PeakConfig {
    /// Symmetric neighbors `-r..=-1, 1..=r`, mean threshold, hop 1.
    pub fn symmetric(r: usize) -> Self {
        Self {
            hopsize: 1,
            neighbors: symmetric_neighbors(r),
            threshold_rule: ThresholdRule::MeanScaled,
            threshold_scale: 1.0,
            min_gap: DEFAULT_MIN_GAP,
        }
    }

    /// Tuned neighbor counts: 8 for energy, 4 for spectral dissimilarity and
    /// 2 for dominant spectral dissimilarity.
    pub fn default_for(kind: DetectorKind) -> Self {
        Self::symmetric(default_neighbor_count(kind))
    }

    pub fn validate(&self) -> Result<()> {
        if self.hopsize == 0 {
            return Err(Error::InvalidPeakConfig("hopsize must be positive"));
        }
        if self.neighbors.is_empty() {
            return Err(Error::InvalidPeakConfig("neighbor list is empty"));
        }
        if self.neighbors.contains(&0) {
            return Err(Error::InvalidPeakConfig("neighbor offset 0"));
        }
        if !(self.min_gap > 0.0 && self.min_gap.is_finite()) {
            return Err(Error::InvalidPeakConfig("min_gap must be positive"));
        }
        if !(self.threshold_scale > 0.0 && self.threshold_scale.is_finite()) {
            return Err(Error::InvalidPeakConfig("threshold scale must be positive"));
        }
        Ok(())
    }
}

pub fn default_neighbor_count(kind: DetectorKind) -> usize {
    match kind {
        DetectorKind::Energy => 8,
        DetectorKind::SpectralDissimilarity => 4,
        DetectorKind::DominantSpectralDissimilarity => 2,
    }
}

pub fn symmetric_neighbors(r: usize) -> Vec<i64> {
    let r = r as i64;
    (-r..=r).filter(|&a| a != 0).collect()
}

/// Threshold a value must exceed to be reported. Returns 0 for an empty
/// slice.
pub fn threshold_value(values: &[f64], rule: ThresholdRule, scale: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    match rule {
        ThresholdRule::MeanScaled => scale * values.iter().sum::<f64>() / values.len() as f64,
        ThresholdRule::ThirdQuartile => {
            let mut sorted = values.to_vec();
            sorted.sort_by(f64::total_cmp);
            let pos = 0.75 * (sorted.len() - 1) as f64;
            let lo = libm::floor(pos) as usize;
            let hi = (lo + 1).min(sorted.len() - 1);
            let frac = pos - lo as f64;
            sorted[lo] + frac * (sorted[hi] - sorted[lo])
        }
    }
}

/// Indices of the reported onsets in `series`.
pub fn peak_indices(series: &DetectionSeries, config: &PeakConfig) -> Result<Vec<usize>> {
    config.validate()?;
    let values = series.values();
    let times = series.times();
    let threshold = threshold_value(values, config.threshold_rule, config.threshold_scale);
    let at = |i: i64| -> f64 {
        usize::try_from(i)
            .ok()
            .and_then(|i| values.get(i).copied())
            .unwrap_or(0.0)
    };

    let mut out = Vec::new();
    let mut k = 0usize;
    while k < values.len() {
        let v = values[k];
        let is_peak = v > threshold
            && config
                .neighbors
                .iter()
                .all(|&a| v > at(k as i64 + a));
        if is_peak {
            out.push(k);
            let tk = times[k];
            match (k + 1..values.len()).find(|&i| times[i] - tk > config.min_gap) {
                Some(next) => k = next,
                None => break,
            }
        } else {
            k += config.hopsize;
        }
    }
    Ok(out)
}

/// Onset times (same unit as the series times, seconds) picked from `series`.
pub fn detect_peaks(series: &DetectionSeries, config: &PeakConfig) -> Result<OnsetSequence> {
    let times = series.times();
    let picked = peak_indices(series, config)?
        .into_iter()
        .map(|i| times[i])
        .collect();
    Ok(OnsetSequence::from_sorted(picked, TimeUnit::Seconds))
}
