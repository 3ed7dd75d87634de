//! PCM WAV ingestion.

use std::io::Read;
use std::path::Path;

use hum_core::Signal;

#[derive(Debug, thiserror::Error)]
pub enum WavError {
    #[error("cannot read audio file: {0}")]
    Unreadable(#[source] std::io::Error),
    #[error("not a PCM WAV file: {0}")]
    NotPcm(String),
    #[error("unsupported channel count {0} (expected 1 or 2)")]
    Channels(u16),
    #[error("audio file contains no samples")]
    Empty,
}

impl From<hound::Error> for WavError {
    fn from(e: hound::Error) -> Self {
        match e {
            hound::Error::IoError(io) => WavError::Unreadable(io),
            other => WavError::NotPcm(other.to_string()),
        }
    }
}

/// Reads a PCM WAV file (8/16/24/32-bit integer or 32-bit float, mono or
/// stereo) into a full-scale mono [`Signal`].
///
/// Integer samples are divided by `2^(bits-1)`, float samples are clamped to
/// `[-1, 1]` and stereo is mixed down by averaging the two channels.
pub fn load_wav(path: impl AsRef<Path>) -> Result<Signal, WavError> {
    let file = std::fs::File::open(path.as_ref()).map_err(WavError::Unreadable)?;
    read_wav(std::io::BufReader::new(file))
}

pub fn read_wav<R: Read>(reader: R) -> Result<Signal, WavError> {
    let mut reader = hound::WavReader::new(reader)?;
    let spec = reader.spec();
    if !(1..=2).contains(&spec.channels) {
        return Err(WavError::Channels(spec.channels));
    }
    let interleaved: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Int => {
            if !matches!(spec.bits_per_sample, 8 | 16 | 24 | 32) {
                return Err(WavError::NotPcm(format!(
                    "{}-bit integer samples",
                    spec.bits_per_sample
                )));
            }
            let full_scale = f64::from(1u32 << (spec.bits_per_sample - 1));
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) / full_scale))
                .collect::<Result<_, _>>()?
        }
        hound::SampleFormat::Float => {
            if spec.bits_per_sample != 32 {
                return Err(WavError::NotPcm(format!(
                    "{}-bit float samples",
                    spec.bits_per_sample
                )));
            }
            reader
                .samples::<f32>()
                .map(|s| s.map(|v| f64::from(v).clamp(-1.0, 1.0)))
                .collect::<Result<_, _>>()?
        }
    };
    let samples: Vec<f64> = match spec.channels {
        1 => interleaved,
        _ => interleaved
            .chunks_exact(2)
            .map(|lr| (lr[0] + lr[1]) / 2.0)
            .collect(),
    };
    if samples.is_empty() {
        return Err(WavError::Empty);
    }
    // NaN float samples pass through the clamp and are rejected here.
    Signal::new(samples, spec.sample_rate).map_err(|e| WavError::NotPcm(e.to_string()))
}
