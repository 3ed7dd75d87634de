//! Detection functions: per-frame statistics that peak at note onsets.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use crate::spectral::{self, Spectrogram};
use crate::{Error, Result, Signal};

/// Default analysis window, in samples.
pub const DEFAULT_WINDOW: usize = 4096;
/// Default hop of the energy detector, in samples.
pub const DEFAULT_ENERGY_HOP: usize = 512;
/// Default hop of both spectral detectors, in samples.
pub const DEFAULT_SPECTRAL_HOP: usize = 2048;
/// Bins above this frequency are ignored by the spectral detectors.
pub const DEFAULT_CUTOFF_HZ: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorKind {
    Energy,
    SpectralDissimilarity,
    DominantSpectralDissimilarity,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 3] = [
        DetectorKind::Energy,
        DetectorKind::SpectralDissimilarity,
        DetectorKind::DominantSpectralDissimilarity,
    ];

    /// Short command-line name: `energy`, `sd` or `dsd`.
    pub fn short_name(self) -> &'static str {
        match self {
            DetectorKind::Energy => "energy",
            DetectorKind::SpectralDissimilarity => "sd",
            DetectorKind::DominantSpectralDissimilarity => "dsd",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownDetector;

impl fmt::Display for UnknownDetector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unknown detector (expected energy, sd or dsd)")
    }
}

impl core::error::Error for UnknownDetector {}

impl FromStr for DetectorKind {
    type Err = UnknownDetector;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s {
            "energy" => Ok(DetectorKind::Energy),
            "sd" | "spectral" => Ok(DetectorKind::SpectralDissimilarity),
            "dsd" | "dominant" => Ok(DetectorKind::DominantSpectralDissimilarity),
            _ => Err(UnknownDetector),
        }
    }
}

/// A detection function sampled once per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionSeries {
    values: Vec<f64>,
    times: Vec<f64>,
    hop: usize,
    window_length: usize,
    kind: DetectorKind,
}

impl DetectionSeries {
    /// Builds a series from raw parts. Values must be finite and
    /// non-negative, times strictly increasing and both of equal length.
    pub fn new(
        values: Vec<f64>,
        times: Vec<f64>,
        hop: usize,
        window_length: usize,
        kind: DetectorKind,
    ) -> Result<Self> {
        if values.len() != times.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: times.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::NonFiniteSample { index });
        }
        if let Some(index) = first_non_increasing(&times) {
            return Err(Error::NonIncreasingOnsets { index });
        }
        Ok(Self {
            values,
            times,
            hop,
            window_length,
            kind,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn window_length(&self) -> usize {
        self.window_length
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub(crate) fn first_non_increasing(xs: &[f64]) -> Option<usize> {
    if let Some(i) = xs.iter().position(|x| !x.is_finite()) {
        return Some(i);
    }
    xs.windows(2).position(|w| w[1] <= w[0]).map(|i| i + 1)
}

/// Local energy: `T[n] = sum_{i<window} x[n*hop + i]^2`, zero-padded.
///
/// One value per `ceil(len / hop)` frames; frame times are window centers.
pub fn energy_detector(signal: &Signal, window_length: usize, hop: usize) -> Result<DetectionSeries> {
    if window_length == 0 {
        return Err(Error::WindowTooShort(0));
    }
    if hop == 0 {
        return Err(Error::InvalidHop);
    }
    if signal.is_empty() {
        return Err(Error::EmptySignal);
    }
    let xs = signal.samples();
    let frames = spectral::frame_count(xs.len(), hop);
    let values = (0..frames)
        .map(|n| {
            let start = n * hop;
            let end = (start + window_length).min(xs.len());
            xs[start..end].iter().map(|x| x * x).sum()
        })
        .collect();
    Ok(DetectionSeries {
        values,
        times: spectral::frame_times(frames, window_length, hop, signal.sample_rate()),
        hop,
        window_length,
        kind: DetectorKind::Energy,
    })
}

fn band_magnitudes(spectrogram: &Spectrogram, cutoff_hz: f64) -> Result<Vec<Vec<f64>>> {
    if spectrogram.frame_count() < 2 {
        return Err(Error::TooFewFrames {
            frames: spectrogram.frame_count(),
        });
    }
    let bins = spectral::band_limit_bins(spectrogram, cutoff_hz)?;
    Ok(spectrogram
        .frames()
        .map(|f| f[..bins].iter().map(|c| c.norm()).collect())
        .collect())
}

fn series_from(spectrogram: &Spectrogram, values: Vec<f64>, kind: DetectorKind) -> DetectionSeries {
    DetectionSeries {
        values,
        times: spectrogram.frame_times().to_vec(),
        hop: spectrogram.hop(),
        window_length: spectrogram.window_length(),
        kind,
    }
}

/// Sum over the band-limited bins of the positive frame-to-frame increase
/// in magnitude. `T[0]` is 0.
pub fn spectral_dissimilarity(spectrogram: &Spectrogram, cutoff_hz: f64) -> Result<DetectionSeries> {
    let mags = band_magnitudes(spectrogram, cutoff_hz)?;
    let mut values = vec![0.0; mags.len()];
    for n in 1..mags.len() {
        values[n] = mags[n]
            .iter()
            .zip(&mags[n - 1])
            .filter(|(now, before)| now > before)
            .map(|(now, before)| now - before)
            .sum();
    }
    Ok(series_from(spectrogram, values, DetectorKind::SpectralDissimilarity))
}

/// Positive frame-to-frame increase of the squared largest band-limited
/// magnitude. `T[0]` is 0.
pub fn dominant_spectral_dissimilarity(
    spectrogram: &Spectrogram,
    cutoff_hz: f64,
) -> Result<DetectionSeries> {
    let peaks: Vec<f64> = band_magnitudes(spectrogram, cutoff_hz)?
        .iter()
        .map(|m| m.iter().copied().fold(0.0, f64::max))
        .collect();
    let mut values = vec![0.0; peaks.len()];
    for n in 1..peaks.len() {
        if peaks[n] > peaks[n - 1] {
            values[n] = peaks[n] * peaks[n] - peaks[n - 1] * peaks[n - 1];
        }
    }
    Ok(series_from(
        spectrogram,
        values,
        DetectorKind::DominantSpectralDissimilarity,
    ))
}

/// Periodogram of a window at an integer bin:
/// `(1/w) * |sum_n x[n] exp(-2*pi*i*bin*n/w)|^2`.
pub fn periodogram(window: &[f64], bin: usize) -> Result<f64> {
    let w = window.len();
    if w == 0 {
        return Err(Error::EmptyInput);
    }
    if bin >= w {
        return Err(Error::BinOutOfRange { bin, len: w });
    }
    let (mut re, mut im) = (0.0, 0.0);
    for (n, &x) in window.iter().enumerate() {
        let theta = -2.0 * PI * ((bin * n) % w) as f64 / w as f64;
        re += x * libm::cos(theta);
        im += x * libm::sin(theta);
    }
    Ok((re * re + im * im) / w as f64)
}

/// Detector choice plus its framing parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub kind: DetectorKind,
    pub window_length: usize,
    pub hop: usize,
    pub cutoff_hz: f64,
}

impl DetectorConfig {
    /// Window 4096 with hop 512 (energy) or 2048 (spectral), 1 kHz cutoff.
    pub fn default_for(kind: DetectorKind) -> Self {
        let hop = match kind {
            DetectorKind::Energy => DEFAULT_ENERGY_HOP,
            _ => DEFAULT_SPECTRAL_HOP,
        };
        Self {
            kind,
            window_length: DEFAULT_WINDOW,
            hop,
            cutoff_hz: DEFAULT_CUTOFF_HZ,
        }
    }

    pub fn run(&self, signal: &Signal) -> Result<DetectionSeries> {
        match self.kind {
            DetectorKind::Energy => energy_detector(signal, self.window_length, self.hop),
            DetectorKind::SpectralDissimilarity => {
                let sp = spectral::stft(signal, self.window_length, self.hop)?;
                spectral_dissimilarity(&sp, self.cutoff_hz)
            }
            DetectorKind::DominantSpectralDissimilarity => {
                let sp = spectral::stft(signal, self.window_length, self.hop)?;
                dominant_spectral_dissimilarity(&sp, self.cutoff_hz)
            }
        }
    }
}
