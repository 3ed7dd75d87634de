//! Onset detection and onset-sequence matching for query by humming.
//!
//! The crate is `no_std` and only needs `alloc`. It covers the algorithmic
//! path from a sampled recording to a ranked list of candidate songs:
//!
//! * [`signal`]: the sampled [`Signal`] and a uniform quantizer.
//! * [`spectral`]: unitary DFT, radix-2 FFT and the short-time transform.
//! * [`detect`]: energy, spectral dissimilarity and dominant spectral
//!   dissimilarity detection functions.
//! * [`peaks`]: peak picking that turns a detection series into onsets.
//! * [`matching`]: subset matching and correlative matching.
//! * [`search`]: song records, databases and ranking.
//!
//! File formats, WAV decoding, power analysis and the command line live in
//! the companion `hum` crate.
#![no_std]
#![deny(rust_2018_idioms, missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod detect;
mod error;
pub mod matching;
pub mod peaks;
pub mod search;
pub mod signal;
pub mod spectral;

pub use detect::{DetectionSeries, DetectorConfig, DetectorKind};
pub use error::{Error, Result};
pub use matching::{MatchResult, SimilarityResult};
pub use peaks::{OnsetSequence, PeakConfig, ThresholdRule, TimeUnit};
pub use search::{Database, RankedEntry, RankedResult, SongRecord};
pub use signal::Signal;
pub use spectral::{Complex, Spectrogram};
