use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Sample rate must be a positive number of samples per second.
    InvalidSampleRate,
    NonFiniteSample { index: usize },
    EmptySignal,
    BitDepthOutOfRange(u32),
    EmptyInput,
    BinOutOfRange { bin: usize, len: usize },
    WindowNotPowerOfTwo(usize),
    WindowTooShort(usize),
    InvalidHop,
    CutoffOutOfRange { cutoff_hz: f64, nyquist_hz: f64 },
    TooFewFrames { frames: usize },
    InvalidPeakConfig(&'static str),
    /// Onset times must be finite and strictly increasing.
    NonIncreasingOnsets { index: usize },
    EmptySequence,
    LengthMismatch { left: usize, right: usize },
    TooShort { len: usize, min: usize },
    UnitMismatch,
    NoFeasibleAlignment,
    DuplicateId(String),
    TooFewOnsets { id: String, len: usize },
    EmptyDatabase,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSampleRate => f.write_str("sample rate must be positive"),
            Error::NonFiniteSample { index } => write!(f, "sample {index} is not finite"),
            Error::EmptySignal => f.write_str("signal has no samples"),
            Error::BitDepthOutOfRange(b) => write!(f, "bit depth {b} outside 1..=32"),
            Error::EmptyInput => f.write_str("input vector is empty"),
            Error::BinOutOfRange { bin, len } => {
                write!(f, "frequency bin {bin} out of range for length {len}")
            }
            Error::WindowNotPowerOfTwo(w) => write!(f, "window length {w} is not a power of two"),
            Error::WindowTooShort(w) => write!(f, "window length {w} is too short"),
            Error::InvalidHop => f.write_str("hop must be at least one sample"),
            Error::CutoffOutOfRange { cutoff_hz, nyquist_hz } => {
                write!(f, "cutoff {cutoff_hz} Hz outside (0, {nyquist_hz}] Hz")
            }
            Error::TooFewFrames { frames } => {
                write!(f, "need at least 2 frames, spectrogram has {frames}")
            }
            Error::InvalidPeakConfig(why) => write!(f, "invalid peak configuration: {why}"),
            Error::NonIncreasingOnsets { index } => {
                write!(f, "non-increasing onsets at position {index}")
            }
            Error::EmptySequence => f.write_str("onset sequence is empty"),
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::TooShort { len, min } => {
                write!(f, "sequence has {len} elements, need at least {min}")
            }
            Error::UnitMismatch => f.write_str("onset sequences use different time units"),
            Error::NoFeasibleAlignment => f.write_str("no feasible anchor pair"),
            Error::DuplicateId(id) => write!(f, "duplicate id {id:?}"),
            Error::TooFewOnsets { id, len } => {
                write!(f, "record {id:?} has {len} onsets, need at least 2")
            }
            Error::EmptyDatabase => f.write_str("database has no records"),
        }
    }
}

impl core::error::Error for Error {}
