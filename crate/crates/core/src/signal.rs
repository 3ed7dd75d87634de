//! Sampled signals and uniform quantization.

use alloc::vec::Vec;

use crate::{Error, Result};

/// A finite sequence of real amplitudes sampled at a fixed rate.
///
/// Amplitudes are nominally in `[-1, 1]` (full scale) but the type does not
/// enforce that; synthetic and scaled signals routinely leave the range.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Signal {
    /// Builds a signal, rejecting a zero sample rate or non-finite samples.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidSampleRate);
        }
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    /// Multiplies every sample by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|x| x * factor).collect(),
            sample_rate: self.sample_rate,
        }
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// Replaces each sample by the nearest of `2^bits` equally spaced levels
/// spanning `[-1, 1]` (both end points included).
///
/// Samples outside the range are clamped first. A sample exactly half way
/// between two levels goes to the lower one.
pub fn quantize(signal: &Signal, bits: u32) -> Result<Signal> {
    if !(1..=32).contains(&bits) {
        return Err(Error::BitDepthOutOfRange(bits));
    }
    let steps = (1u64 << bits) - 1;
    let step = 2.0 / steps as f64;
    let level = |j: u64| -1.0 + j as f64 * step;

    let samples = signal
        .samples
        .iter()
        .map(|&x| {
            let pos = (x.clamp(-1.0, 1.0) + 1.0) / step;
            let lower = libm::floor(pos);
            let mut j = lower as u64;
            if pos - lower > 0.5 {
                j += 1;
            }
            level(j.min(steps))
        })
        .collect();
    Ok(Signal {
        samples,
        sample_rate: signal.sample_rate,
    })
}
