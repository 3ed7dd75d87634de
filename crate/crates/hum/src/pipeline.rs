//! Detector, peak picker and ranking settings bundled together.

use hum_core::detect::DetectorConfig;
use hum_core::peaks::detect_peaks;
use hum_core::search::{rank, DEFAULT_CLOSENESS};
use hum_core::{Database, DetectionSeries, DetectorKind, OnsetSequence, PeakConfig, RankedResult, Signal};

pub const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub detector: DetectorConfig,
    pub peaks: PeakConfig,
    pub top_k: usize,
    pub closeness: f64,
}

impl PipelineConfig {
    /// Tuned defaults for `kind`: window 4096 and mean threshold for all;
    /// hop 512 with 8 neighbors each side for energy, hop 2048 with 4 for
    /// spectral dissimilarity and 2 for dominant spectral dissimilarity.
    pub fn default_for(kind: DetectorKind) -> Self {
        Self {
            detector: DetectorConfig::default_for(kind),
            peaks: PeakConfig::default_for(kind),
            top_k: DEFAULT_TOP_K,
            closeness: DEFAULT_CLOSENESS,
        }
    }

    pub fn series(&self, signal: &Signal) -> hum_core::Result<DetectionSeries> {
        self.detector.run(signal)
    }

    /// Onset times of `signal`, in seconds.
    pub fn onsets(&self, signal: &Signal) -> hum_core::Result<OnsetSequence> {
        detect_peaks(&self.series(signal)?, &self.peaks)
    }

    pub fn rank(&self, db: &Database, query: &OnsetSequence) -> hum_core::Result<RankedResult> {
        rank(db, query, self.top_k, self.closeness)
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::default_for(DetectorKind::Energy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_per_detector() {
        let e = PipelineConfig::default_for(DetectorKind::Energy);
        assert_eq!((e.detector.window_length, e.detector.hop, e.peaks.neighbors.len()), (4096, 512, 16));
        let s = PipelineConfig::default_for(DetectorKind::SpectralDissimilarity);
        assert_eq!((s.detector.hop, s.peaks.neighbors.len()), (2048, 8));
        let d = PipelineConfig::default_for(DetectorKind::DominantSpectralDissimilarity);
        assert_eq!((d.detector.hop, d.peaks.neighbors.len()), (2048, 4));
        for c in [e, s, d] {
            assert_eq!(c.peaks.threshold_rule, hum_core::ThresholdRule::MeanScaled);
            assert_eq!(c.peaks.threshold_scale, 1.0);
        }
    }

    #[test]
    fn silence_has_no_onsets() {
        let signal = Signal::new(vec![0.0; 48_000], 48_000).unwrap();
        for kind in DetectorKind::ALL {
            assert!(PipelineConfig::default_for(kind).onsets(&signal).unwrap().is_empty());
        }
    }
}
