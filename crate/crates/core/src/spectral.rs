//! Discrete Fourier transforms and the short-time transform.
//!
//! [`dft`] is unitary (scaled by `1/sqrt(N)`), so it preserves the Euclidean
//! norm. [`stft`] follows the usual short-time convention of summing over
//! the window without any normalization; frame `n` covers samples
//! `[n*hop, n*hop + window)` and is stamped with the time of the window
//! center.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{Error, Result, Signal};

pub type Complex = num_complex::Complex64;

/// Iterative in-place radix-2 FFT with precomputed twiddles.
///
/// The transform is unnormalized with kernel `exp(-2*pi*i*k*n/N)`.
#[derive(Debug, Clone)]
pub struct Radix2Fft {
    len: usize,
    twiddles: Vec<Complex>,
    bit_reverse: Vec<usize>,
}

impl Radix2Fft {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyInput);
        }
        if !len.is_power_of_two() {
            return Err(Error::WindowNotPowerOfTwo(len));
        }
        let twiddles = (0..len / 2)
            .map(|k| {
                let theta = -2.0 * PI * k as f64 / len as f64;
                Complex::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        let bits = len.trailing_zeros();
        let bit_reverse = (0..len)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Ok(Self {
            len,
            twiddles,
            bit_reverse,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Transforms `buf` in place. `buf.len()` must equal [`Self::len`].
    pub fn process(&self, buf: &mut [Complex]) {
        assert_eq!(buf.len(), self.len, "buffer length does not match plan");
        for i in 0..self.len {
            let j = self.bit_reverse[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= self.len {
            let half = size / 2;
            let stride = self.len / size;
            for start in (0..self.len).step_by(size) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
    }
}

fn direct_sum(x: &[Complex], sign: f64) -> Vec<Complex> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, &v)| {
                    // Reduce k*j mod n first so the angle stays small.
                    let theta = sign * 2.0 * PI * ((k * j) % n) as f64 / n as f64;
                    v * Complex::new(libm::cos(theta), libm::sin(theta))
                })
                .sum()
        })
        .collect()
}

/// Unitary DFT: `y[k] = N^(-1/2) * sum_n x[n] exp(-2*pi*i*k*n/N)`.
///
/// Power-of-two lengths go through [`Radix2Fft`]; anything else is summed
/// directly in `O(N^2)`.
pub fn dft(x: &[Complex]) -> Result<Vec<Complex>> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let scale = 1.0 / libm::sqrt(x.len() as f64);
    let mut y = if x.len().is_power_of_two() {
        let mut buf = x.to_vec();
        Radix2Fft::new(x.len())?.process(&mut buf);
        buf
    } else {
        direct_sum(x, -1.0)
    };
    y.iter_mut().for_each(|v| *v *= scale);
    Ok(y)
}

/// Inverse of [`dft`].
pub fn idft(y: &[Complex]) -> Result<Vec<Complex>> {
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    // conj(F conj(y)) inverts a unitary forward transform.
    let conj: Vec<Complex> = y.iter().map(|v| v.conj()).collect();
    Ok(dft(&conj)?.into_iter().map(|v| v.conj()).collect())
}

/// Normalized complex exponential of order `n` at bin `f`:
/// element `j` is `n^(-1/2) * exp(2*pi*i*f*j/n)`.
pub fn pure_tone(f: usize, n: usize) -> Result<Vec<Complex>> {
    if f >= n {
        return Err(Error::BinOutOfRange { bin: f, len: n });
    }
    let scale = 1.0 / libm::sqrt(n as f64);
    Ok((0..n)
        .map(|j| {
            let theta = 2.0 * PI * ((f * j) % n) as f64 / n as f64;
            Complex::new(libm::cos(theta), libm::sin(theta)) * scale
        })
        .collect())
}

/// Short-time Fourier coefficients of a real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    coefficients: Vec<Complex>,
    window_length: usize,
    hop: usize,
    sample_rate: u32,
    frame_times: Vec<f64>,
}

impl Spectrogram {
    /// Assembles a spectrogram from precomputed frames, each holding
    /// `window_length` bins. Frame times are derived from `hop`.
    pub fn from_frames(
        frames: Vec<Vec<Complex>>,
        window_length: usize,
        hop: usize,
        sample_rate: u32,
    ) -> Result<Self> {
        check_window(window_length)?;
        if hop == 0 {
            return Err(Error::InvalidHop);
        }
        if sample_rate == 0 {
            return Err(Error::InvalidSampleRate);
        }
        if let Some(bad) = frames.iter().find(|f| f.len() != window_length) {
            return Err(Error::LengthMismatch {
                left: bad.len(),
                right: window_length,
            });
        }
        let frame_times = frame_times(frames.len(), window_length, hop, sample_rate);
        Ok(Self {
            coefficients: frames.into_iter().flatten().collect(),
            window_length,
            hop,
            sample_rate,
            frame_times,
        })
    }

    pub fn frame_count(&self) -> usize {
        self.frame_times.len()
    }

    /// The `window_length` coefficients of frame `n`.
    pub fn frame(&self, n: usize) -> &[Complex] {
        &self.coefficients[n * self.window_length..(n + 1) * self.window_length]
    }

    pub fn frames(&self) -> impl ExactSizeIterator<Item = &[Complex]> + '_ {
        self.coefficients.chunks_exact(self.window_length)
    }

    pub fn window_length(&self) -> usize {
        self.window_length
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn frame_times(&self) -> &[f64] {
        &self.frame_times
    }

    /// Multiplies every coefficient by `factor`.
    pub fn map_coefficients(&self, factor: Complex) -> Self {
        let mut out = self.clone();
        out.coefficients.iter_mut().for_each(|c| *c *= factor);
        out
    }
}

fn check_window(window_length: usize) -> Result<()> {
    if window_length < 2 {
        return Err(Error::WindowTooShort(window_length));
    }
    if !window_length.is_power_of_two() {
        return Err(Error::WindowNotPowerOfTwo(window_length));
    }
    Ok(())
}

/// Number of frames for `len` samples: `ceil(len / hop)`, at least one.
pub fn frame_count(len: usize, hop: usize) -> usize {
    len.div_ceil(hop).max(1)
}

/// Center time of each frame: `(n*hop + window/2) / sample_rate`.
pub fn frame_times(frames: usize, window_length: usize, hop: usize, sample_rate: u32) -> Vec<f64> {
    let rate = f64::from(sample_rate);
    let half = window_length as f64 / 2.0;
    (0..frames)
        .map(|n| ((n * hop) as f64 + half) / rate)
        .collect()
}

/// Rectangular-window STFT, zero-padded past the end of the signal.
pub fn stft(signal: &Signal, window_length: usize, hop: usize) -> Result<Spectrogram> {
    check_window(window_length)?;
    if hop == 0 {
        return Err(Error::InvalidHop);
    }
    if signal.is_empty() {
        return Err(Error::EmptySignal);
    }
    let samples = signal.samples();
    let frames = frame_count(samples.len(), hop);
    let plan = Radix2Fft::new(window_length)?;
    let mut coefficients = vec![Complex::new(0.0, 0.0); frames * window_length];
    for (n, frame) in coefficients.chunks_exact_mut(window_length).enumerate() {
        let start = n * hop;
        let end = (start + window_length).min(samples.len());
        for (slot, &x) in frame.iter_mut().zip(&samples[start..end]) {
            *slot = Complex::new(x, 0.0);
        }
        plan.process(frame);
    }
    Ok(Spectrogram {
        coefficients,
        window_length,
        hop,
        sample_rate: signal.sample_rate(),
        frame_times: frame_times(frames, window_length, hop, signal.sample_rate()),
    })
}

/// Number of low-frequency bins `K = floor(cutoff * window / rate) + 1`
/// kept by the spectral detectors; bins `0..K` are used.
pub fn band_limit_bins(spectrogram: &Spectrogram, cutoff_hz: f64) -> Result<usize> {
    band_limit(spectrogram.window_length, spectrogram.sample_rate, cutoff_hz)
}

pub(crate) fn band_limit(window_length: usize, sample_rate: u32, cutoff_hz: f64) -> Result<usize> {
    let rate = f64::from(sample_rate);
    let nyquist_hz = rate / 2.0;
    if !(cutoff_hz > 0.0 && cutoff_hz <= nyquist_hz) {
        return Err(Error::CutoffOutOfRange {
            cutoff_hz,
            nyquist_hz,
        });
    }
    let k = libm::floor(cutoff_hz * window_length as f64 / rate) as usize + 1;
    Ok(k.min(window_length))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    fn norm_sq(x: &[Complex]) -> f64 {
        x.iter().map(|v| v.norm_sqr()).sum()
    }

    fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex> {
        (0..n)
            .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn impulse_spreads_uniformly() {
        let y = dft(&[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        for v in y {
            assert!((v - c(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert_eq!(dft(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn pure_tone_maps_to_single_bin() {
        for &(f, n) in &[(3usize, 16usize), (5, 12), (0, 7)] {
            let y = dft(&pure_tone(f, n).unwrap()).unwrap();
            for (k, v) in y.iter().enumerate() {
                let want = if k == f { 1.0 } else { 0.0 };
                assert!((v.norm() - want).abs() < 1e-9, "n={n} k={k} |y|={}", v.norm());
            }
        }
    }

    #[test]
    fn pure_tone_basics() {
        let v = pure_tone(0, 4).unwrap();
        assert!(v.iter().all(|x| (*x - c(0.5)).norm() < 1e-15));
        assert_eq!(pure_tone(4, 4), Err(Error::BinOutOfRange { bin: 4, len: 4 }));

        let n = 32;
        for f in 0..n {
            let vf = pure_tone(f, n).unwrap();
            assert!((norm_sq(&vf) - 1.0).abs() < 1e-12);
            for g in (0..n).filter(|&g| g != f) {
                let vg = pure_tone(g, n).unwrap();
                let inner: Complex = vf.iter().zip(&vg).map(|(a, b)| a * b.conj()).sum();
                assert!(inner.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fft_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 2, 4, 8, 64, 256] {
            let x = random_complex(&mut rng, n);
            let mut fast = x.clone();
            Radix2Fft::new(n).unwrap().process(&mut fast);
            let slow = direct_sum(&x, -1.0);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-9, "n={n}");
            }
        }
    }

    #[test]
    fn parseval_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1024usize, 100] {
            let x = random_complex(&mut rng, n);
            let y = dft(&x).unwrap();
            let (ex, ey) = (norm_sq(&x), norm_sq(&y));
            assert!((ex - ey).abs() <= 1e-9 * ex);
            let back = idft(&y).unwrap();
            for (a, b) in x.iter().zip(&back) {
                assert!((a - b).norm() < 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn dft_is_linear(
            seed in any::<u64>(),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            log_n in 0u32..8,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 1usize << log_n;
            let x = random_complex(&mut rng, n);
            let y = random_complex(&mut rng, n);
            let mix: Vec<Complex> = x.iter().zip(&y).map(|(p, q)| p * a + q * b).collect();
            let lhs = dft(&mix).unwrap();
            let (dx, dy) = (dft(&x).unwrap(), dft(&y).unwrap());
            for k in 0..n {
                let rhs = dx[k] * a + dy[k] * b;
                prop_assert!((lhs[k] - rhs).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn stft_of_silence_is_zero() {
        let s = Signal::new(vec![0.0; 1000], 8000).unwrap();
        let sp = stft(&s, 64, 16).unwrap();
        assert!(sp.frames().all(|f| f.iter().all(|v| v.norm() == 0.0)));
    }

    #[test]
    fn stft_cosine_peaks_at_bin() {
        let (w, rate, k0, amp) = (256usize, 8000u32, 10usize, 0.7);
        let f = k0 as f64 * f64::from(rate) / w as f64;
        let xs: Vec<f64> = (0..2048)
            .map(|n| amp * libm::cos(2.0 * PI * f * n as f64 / f64::from(rate)))
            .collect();
        let sp = stft(&Signal::new(xs.clone(), rate).unwrap(), w, 128).unwrap();
        let frame = sp.frame(2);
        // Direct summation oracle for the same frame.
        let start = 2 * 128;
        for (k, &bin) in frame.iter().enumerate() {
            let direct: Complex = (0..w)
                .map(|m| {
                    let theta = -2.0 * PI * ((k * m) % w) as f64 / w as f64;
                    Complex::new(libm::cos(theta), libm::sin(theta)) * xs[start + m]
                })
                .sum();
            assert!((direct - bin).norm() < 1e-9);
        }
        let want = amp * w as f64 / 2.0;
        assert!((frame[k0].norm() - want).abs() < 1e-9);
        assert!((frame[w - k0].norm() - want).abs() < 1e-9);
        let others = (0..w).filter(|&k| k != k0 && k != w - k0);
        assert!(others.map(|k| frame[k].norm()).all(|m| m < 1e-9));
    }

    #[test]
    fn stft_parseval_per_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..5000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (w, h) = (512usize, 200usize);
        let sp = stft(&Signal::new(xs.clone(), 16000).unwrap(), w, h).unwrap();
        for n in 0..sp.frame_count() {
            let energy: f64 = xs.iter().skip(n * h).take(w).map(|x| x * x).sum();
            let spec = norm_sq(sp.frame(n));
            assert!((spec - w as f64 * energy).abs() <= 1e-6 * spec.max(1e-300));
        }
    }

    #[test]
    fn frame_layout_by_enumeration() {
        for len in 1..40usize {
            for hop in 1..9usize {
                let s = Signal::new(vec![0.0; len], 1000).unwrap();
                let sp = stft(&s, 8, hop).unwrap();
                let mut expected = 0;
                while expected * hop < len {
                    expected += 1;
                }
                assert_eq!(sp.frame_count(), expected.max(1));
                for (n, &t) in sp.frame_times().iter().enumerate() {
                    assert!((t - (n * hop + 4) as f64 / 1000.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn stft_rejects_bad_windows() {
        let s = Signal::new(vec![0.0; 10], 1000).unwrap();
        assert_eq!(stft(&s, 6, 1), Err(Error::WindowNotPowerOfTwo(6)));
        assert_eq!(stft(&s, 1, 1), Err(Error::WindowTooShort(1)));
        assert_eq!(stft(&s, 8, 0), Err(Error::InvalidHop));
    }

    #[test]
    fn band_limits() {
        let s = Signal::new(vec![0.0; 10], 48_000).unwrap();
        let sp = stft(&s, 4096, 2048).unwrap();
        assert_eq!(band_limit_bins(&sp, 1000.0).unwrap(), 86);
        assert_eq!(band_limit_bins(&sp, 24_000.0).unwrap(), 2049);
        assert_eq!(band_limit_bins(&sp, 11.72).unwrap(), 2);
        assert!(matches!(
            band_limit_bins(&sp, 24_000.5),
            Err(Error::CutoffOutOfRange { .. })
        ));
        assert!(band_limit_bins(&sp, 0.0).is_err());
        for w in [2usize, 8, 1024] {
            assert_eq!(band_limit(w, 44_100, 22_050.0).unwrap(), w / 2 + 1);
        }
    }
}
