//! Detection power under a single-onset signal model.
//!
//! The model is white Gaussian noise with standard deviation `sigma`; from
//! sample `k*` on, a decaying sinusoid
//! `A * exp(-lambda * t) * cos(2 * pi * f0 * t)` (with `t = (k - k*) / S_f`)
//! is added to the mean. Three tools are provided:
//!
//! * [`energy_power_lower_bound`]: a Boole-Frechet lower bound on the
//!   probability that the energy detector reports an onset at a given
//!   window position. The threshold tail uses exact (noncentral)
//!   chi-squared probabilities; the neighbor comparisons are ratios of
//!   independent noncentral chi-squared sums, estimated by simulation.
//! * [`false_positive_upper_bound`]: `p * (2 - p) / 2` for a pure-noise
//!   window whose threshold tail is `p`.
//! * [`monte_carlo_power`]: runs the full detector and peak picker on
//!   simulated signals and tabulates where onsets are reported.
//!
//! All simulation uses `ChaCha8Rng` with ziggurat normals
//! (`rand_distr::StandardNormal`). Every trial (or every neighbor
//! comparison) gets its own stream derived from the master seed with
//! SplitMix64, so results do not depend on the number of worker threads.

pub mod chi2;

use std::io::{self, Write};

use hum_core::detect::DetectorConfig;
use hum_core::peaks::{peak_indices, PeakConfig};
use hum_core::{DetectorKind, Signal};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use self::chi2::NoncentralChiSquared;

/// Noise variance of the reference recordings, in squared 16-bit units.
pub const REFERENCE_NOISE_VARIANCE: f64 = 10165.98;
/// Squared signal-to-noise ratio `(A / sigma)^2` of the reference setup.
pub const REFERENCE_SSNR: f64 = 5000.0;
/// Minimum number of draws for each simulated neighbor comparison.
pub const DEFAULT_BOUND_DRAWS: usize = 100_000;

#[derive(Debug, thiserror::Error)]
pub enum PowerError {
    #[error("invalid model: {0}")]
    InvalidModel(&'static str),
    #[error("offset must be non-negative, got {0}")]
    NegativeOffset(i64),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("invalid setup: {0}")]
    InvalidSetup(&'static str),
    #[error(transparent)]
    Detection(#[from] hum_core::Error),
}

/// Single onset in white Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnsetModel {
    pub amplitude: f64,
    /// Decay rate `lambda`, per second.
    pub decay: f64,
    /// Frequency `f0` of the note, Hz.
    pub frequency: f64,
    pub noise_sd: f64,
    pub sample_rate: u32,
    /// Sample index `k*` of the onset.
    pub onset_index: usize,
    /// Number of samples in a synthesized signal.
    pub length: usize,
}

impl OnsetModel {
    /// Six seconds at 48 kHz, squared SNR 5000 and noise scaled from the
    /// reference variance to full scale.
    ///
    /// The note is a tone on bin 18 of the default 4096-sample window
    /// (210.9375 Hz), decaying at 1.25 per second and starting at
    /// sample 24576 (a multiple of both default hops). The signal is long
    /// enough for the tone to fade below the noise before it ends, so the
    /// truncated last frames do not look like onsets.
    pub fn reference() -> Self {
        let noise_sd = REFERENCE_NOISE_VARIANCE.sqrt() / 32768.0;
        Self {
            amplitude: noise_sd * REFERENCE_SSNR.sqrt(),
            decay: 1.25,
            frequency: 18.0 * 48_000.0 / 4096.0,
            noise_sd,
            sample_rate: 48_000,
            onset_index: 24_576,
            length: 288_000,
        }
    }

    /// Same model with amplitude set so that `(A / sigma)^2 == ssnr`.
    pub fn with_ssnr(mut self, ssnr: f64) -> Self {
        self.amplitude = self.noise_sd * ssnr.sqrt();
        self
    }

    pub fn ssnr(&self) -> f64 {
        (self.amplitude / self.noise_sd).powi(2)
    }

    /// Energy threshold at the mean-threshold level used for the reference
    /// setup: `alpha = SSNR * sigma^2`.
    pub fn mean_threshold_level(&self) -> f64 {
        self.ssnr() * self.noise_sd * self.noise_sd
    }

    pub fn validate(&self) -> Result<(), PowerError> {
        let finite = [self.amplitude, self.decay, self.frequency, self.noise_sd]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(PowerError::InvalidModel("parameters must be finite"));
        }
        if self.amplitude <= 0.0 {
            return Err(PowerError::InvalidModel("amplitude must be positive"));
        }
        if self.decay < 0.0 {
            return Err(PowerError::InvalidModel("decay must be non-negative"));
        }
        if self.frequency < 0.0 {
            return Err(PowerError::InvalidModel("frequency must be non-negative"));
        }
        if self.noise_sd <= 0.0 {
            return Err(PowerError::InvalidModel("noise sd must be positive"));
        }
        if self.sample_rate == 0 {
            return Err(PowerError::InvalidModel("sample rate must be positive"));
        }
        if self.length == 0 || self.onset_index >= self.length {
            return Err(PowerError::InvalidModel("onset index must lie inside the signal"));
        }
        Ok(())
    }

    /// Mean of sample `k`.
    pub fn mean_at(&self, k: usize) -> f64 {
        if k < self.onset_index {
            return 0.0;
        }
        let t = (k - self.onset_index) as f64 / f64::from(self.sample_rate);
        self.amplitude
            * (-self.decay * t).exp()
            * (2.0 * std::f64::consts::PI * self.frequency * t).cos()
    }
}

/// SplitMix64 finalizer, used to derive independent per-task seeds.
pub fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws one realization of the model.
pub fn synth_signal(model: &OnsetModel, seed: u64) -> Result<Signal, PowerError> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..model.length)
        .map(|k| {
            let z: f64 = StandardNormal.sample(&mut rng);
            model.mean_at(k) + model.noise_sd * z
        })
        .collect();
    Ok(Signal::new(samples, model.sample_rate)?)
}

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = a + (p as f64 + 0.5) * h;
            let half = h / 2.0;
            GL_NODES
                .iter()
                .zip(&GL_WEIGHTS)
                .map(|(&x, &w)| w * (f(mid - half * x) + f(mid + half * x)))
                .sum::<f64>()
                * half
        })
        .sum()
}

/// Noncentrality accumulated by the first `offset` samples after the onset,
/// in units of `sigma^2`:
/// `(S_f / sigma^2) * integral_0^{offset/S_f} A^2 exp(-2 lambda u) cos^2(2 pi f0 u) du`.
pub fn noncentrality_integral(model: &OnsetModel, offset: i64) -> Result<f64, PowerError> {
    if offset < 0 {
        return Err(PowerError::NegativeOffset(offset));
    }
    Ok(ncp_to(model, offset as f64))
}

fn ncp_to(model: &OnsetModel, offset: f64) -> f64 {
    if offset <= 0.0 {
        return 0.0;
    }
    let rate = f64::from(model.sample_rate);
    let t = offset / rate;
    let (a2, lam, w) = (
        model.amplitude * model.amplitude,
        model.decay,
        2.0 * std::f64::consts::PI * model.frequency,
    );
    let integrand = |u: f64| a2 * (-2.0 * lam * u).exp() * (w * u).cos().powi(2);
    // Eight panels per period of cos^2 and per decay time keep the 8-point
    // rule well below 1e-10 relative error.
    let oscillations = t * model.frequency * 2.0;
    let decays = t * 2.0 * lam;
    let panels = (8.0 * (oscillations + decays)).ceil().max(8.0) as usize;
    rate / (model.noise_sd * model.noise_sd) * gauss_legendre(integrand, 0.0, t, panels)
}

/// Noncentrality of the energy in samples `[start, end)`, indices relative
/// to the onset.
fn segment_ncp(model: &OnsetModel, start: i64, end: i64) -> f64 {
    (ncp_to(model, end as f64) - ncp_to(model, start as f64)).max(0.0)
}

/// `p * (2 - p) / 2`, the bound on reporting a pure-noise window.
pub fn false_positive_upper_bound(p_alpha: f64) -> Result<f64, PowerError> {
    if !(0.0..=1.0).contains(&p_alpha) {
        return Err(PowerError::InvalidProbability(p_alpha));
    }
    Ok(0.5 * p_alpha * (2.0 - p_alpha))
}

/// `P(T > alpha)` for a pure-noise energy window of `window_length` samples.
pub fn noise_threshold_tail(model: &OnsetModel, window_length: usize, alpha: f64) -> f64 {
    chi2::central_sf(window_length as f64, alpha / (model.noise_sd * model.noise_sd))
}

/// Parameters of the analytic energy-detector bound.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBoundSetup {
    pub window_length: usize,
    /// Detector hop in samples; neighbor `a` sits `a * hop` samples away.
    pub hop: usize,
    pub neighbors: Vec<i64>,
    /// Threshold `alpha` on the energy, in signal units squared.
    pub threshold: f64,
    pub draws: usize,
    pub seed: u64,
}

impl EnergyBoundSetup {
    /// Energy-detector framing with the neighbors of `peaks` and the model's
    /// mean-threshold level.
    pub fn new(model: &OnsetModel, window_length: usize, hop: usize, peaks: &PeakConfig) -> Self {
        Self {
            window_length,
            hop,
            neighbors: peaks.neighbors.clone(),
            threshold: model.mean_threshold_level(),
            draws: DEFAULT_BOUND_DRAWS,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<(), PowerError> {
        if self.window_length == 0 || self.hop == 0 {
            return Err(PowerError::InvalidSetup("window and hop must be positive"));
        }
        if self.neighbors.is_empty() || self.neighbors.contains(&0) {
            return Err(PowerError::InvalidSetup("neighbors must be non-empty and non-zero"));
        }
        if self.draws == 0 {
            return Err(PowerError::InvalidSetup("draws must be positive"));
        }
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(PowerError::InvalidSetup("threshold must be non-negative"));
        }
        Ok(())
    }
}

/// Lower bound at one window position, with its ingredients.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundPoint {
    /// Window start minus onset index, samples.
    pub offset: i64,
    pub probability: f64,
    /// Standard error from the simulated neighbor comparisons.
    pub stderr: f64,
    /// `P(T > alpha)` at this window.
    pub threshold_tail: f64,
    /// `P(T[k] > T[k + a*hop])` for each neighbor `a`.
    pub neighbor_probabilities: Vec<f64>,
}

/// Samples `[x_start, x_end)` and `[y_start, y_end)` (relative to the onset)
/// whose energies decide `T[k] > T[k + shift]`; the rest of the two windows
/// is shared.
fn comparison_segments(offset: i64, shift: i64, window: i64) -> ((i64, i64), (i64, i64)) {
    let len = shift.abs().min(window);
    if shift > 0 {
        ((offset, offset + len), (offset + shift + window - len, offset + shift + window))
    } else {
        let back = -shift;
        ((offset + window - len, offset + window), (offset - back, offset - back + len))
    }
}

/// Boole-Frechet lower bound on reporting an energy onset at the window
/// starting `offset` samples after the true onset (negative: before):
/// `max(0, sum_a P(T[k] > T[k + a*hop]) + P(T[k] > alpha) - r)` with `r`
/// the number of neighbors.
pub fn energy_power_lower_bound(
    model: &OnsetModel,
    setup: &EnergyBoundSetup,
    offset: i64,
) -> Result<BoundPoint, PowerError> {
    model.validate()?;
    setup.validate()?;
    let window = setup.window_length as i64;
    let sigma2 = model.noise_sd * model.noise_sd;
    let threshold_tail = chi2::noncentral_sf(
        setup.window_length as f64,
        segment_ncp(model, offset, offset + window),
        setup.threshold / sigma2,
    );

    let mut neighbor_probabilities = Vec::with_capacity(setup.neighbors.len());
    let mut variance = 0.0;
    for (idx, &a) in setup.neighbors.iter().enumerate() {
        let ((xs, xe), (ys, ye)) = comparison_segments(offset, a * setup.hop as i64, window);
        let (ncp_x, ncp_y) = (segment_ncp(model, xs, xe), segment_ncp(model, ys, ye));
        let dof = (xe - xs) as usize;
        let stream = mix_seed(setup.seed, offset as u64, idx as u64);
        let (p, se) = prob_greater(dof, ncp_x, ncp_y, setup.draws, stream);
        neighbor_probabilities.push(p);
        variance += se * se;
    }
    let total = neighbor_probabilities.iter().sum::<f64>() + threshold_tail
        - setup.neighbors.len() as f64;
    Ok(BoundPoint {
        offset,
        probability: total.clamp(0.0, 1.0),
        stderr: variance.sqrt(),
        threshold_tail,
        neighbor_probabilities,
    })
}

/// `P(X > Y)` for independent noncentral chi-squared `X`, `Y` sharing `dof`.
fn prob_greater(dof: usize, ncp_x: f64, ncp_y: f64, draws: usize, seed: u64) -> (f64, f64) {
    if ncp_x == ncp_y {
        // Identically distributed and continuous.
        return (0.5, 0.0);
    }
    let (dx, dy) = (
        NoncentralChiSquared::new(dof, ncp_x),
        NoncentralChiSquared::new(dof, ncp_y),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wins = (0..draws)
        .filter(|_| dx.sample(&mut rng) > dy.sample(&mut rng))
        .count();
    let p = wins as f64 / draws as f64;
    (p, (p * (1.0 - p) / draws as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    AnalyticLowerBound,
    MonteCarlo,
}

/// Probability of reporting an onset as a function of window position.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    pub kind: CurveKind,
    pub detector: DetectorKind,
    /// Window start minus onset index, samples, increasing.
    pub offsets: Vec<i64>,
    pub probabilities: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Simulation trials, or draws per comparison for the analytic bound.
    pub trials: usize,
    pub seed: u64,
    pub window_length: usize,
    pub sample_rate: u32,
    /// Monte Carlo only: reported window offsets of every trial.
    pub trial_offsets: Vec<Vec<i64>>,
}

impl PowerCurve {
    /// Writes `offset_samples,probability,stderr` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "offset_samples,probability,stderr")?;
        for ((o, p), s) in self.offsets.iter().zip(&self.probabilities).zip(&self.stderr) {
            writeln!(out, "{o},{p},{s}")?;
        }
        Ok(())
    }

    /// Maximal runs of consecutive grid offsets whose probability is at
    /// least `level`, as inclusive `(first, last)` pairs.
    pub fn regions_at_least(&self, level: f64) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        let mut run: Option<(i64, i64)> = None;
        for (&o, &p) in self.offsets.iter().zip(&self.probabilities) {
            if p >= level {
                run = Some(run.map_or((o, o), |(s, _)| (s, o)));
            } else if let Some(r) = run.take() {
                out.push(r);
            }
        }
        out.extend(run);
        out
    }

    /// Time between a reported frame's center stamp and the true onset.
    pub fn time_offset(&self, offset: i64) -> f64 {
        (offset as f64 + self.window_length as f64 / 2.0) / f64::from(self.sample_rate)
    }

    /// Fraction of trials reporting at least one onset within `tol` seconds
    /// of the true onset.
    pub fn near_fraction(&self, tol: f64) -> f64 {
        self.trial_fraction(|dt| dt.abs() <= tol)
    }

    /// Fraction of trials reporting at least one onset more than `tol`
    /// seconds away from the true onset.
    pub fn far_fraction(&self, tol: f64) -> f64 {
        self.trial_fraction(|dt| dt.abs() > tol)
    }

    fn trial_fraction(&self, pred: impl Fn(f64) -> bool) -> f64 {
        if self.trial_offsets.is_empty() {
            return 0.0;
        }
        let hits = self
            .trial_offsets
            .iter()
            .filter(|t| t.iter().any(|&o| pred(self.time_offset(o))))
            .count();
        hits as f64 / self.trial_offsets.len() as f64
    }

    /// Per trial, the time offset of the reported onset closest to the true
    /// onset. Trials without any report are left out.
    pub fn closest_time_offsets(&self) -> Vec<f64> {
        self.trial_offsets
            .iter()
            .filter_map(|t| {
                t.iter()
                    .map(|&o| self.time_offset(o))
                    .min_by(|a, b| a.abs().total_cmp(&b.abs()))
            })
            .collect()
    }

    pub fn probability_at(&self, offset: i64) -> f64 {
        self.offsets
            .binary_search(&offset)
            .map_or(0.0, |i| self.probabilities[i])
    }
}

/// Evaluates [`energy_power_lower_bound`] over `offsets` in parallel.
pub fn energy_bound_curve(
    model: &OnsetModel,
    setup: &EnergyBoundSetup,
    offsets: &[i64],
) -> Result<PowerCurve, PowerError> {
    let points = offsets
        .par_iter()
        .map(|&o| energy_power_lower_bound(model, setup, o))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PowerCurve {
        kind: CurveKind::AnalyticLowerBound,
        detector: DetectorKind::Energy,
        offsets: points.iter().map(|p| p.offset).collect(),
        probabilities: points.iter().map(|p| p.probability).collect(),
        stderr: points.iter().map(|p| p.stderr).collect(),
        trials: setup.draws,
        seed: setup.seed,
        window_length: setup.window_length,
        sample_rate: model.sample_rate,
        trial_offsets: Vec::new(),
    })
}

/// Detector, peak picker and trial count for [`monte_carlo_power`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSetup {
    pub detector: DetectorConfig,
    pub peaks: PeakConfig,
    pub trials: usize,
    pub seed: u64,
}

impl SimulationSetup {
    pub fn default_for(kind: DetectorKind, trials: usize, seed: u64) -> Self {
        Self {
            detector: DetectorConfig::default_for(kind),
            peaks: PeakConfig::default_for(kind),
            trials,
            seed,
        }
    }
}

/// Window offsets (frame start minus onset index) reported in one trial.
pub fn simulate_trial(
    model: &OnsetModel,
    setup: &SimulationSetup,
    trial: usize,
) -> Result<Vec<i64>, PowerError> {
    let signal = synth_signal(model, mix_seed(setup.seed, trial as u64, 0))?;
    let series = setup.detector.run(&signal)?;
    let hop = setup.detector.hop as i64;
    Ok(peak_indices(&series, &setup.peaks)?
        .into_iter()
        .map(|n| n as i64 * hop - model.onset_index as i64)
        .collect())
}

/// Simulates `setup.trials` signals, runs the detector and peak picker on
/// each and reports, per window offset, the fraction of trials with an
/// onset there.
pub fn monte_carlo_power(model: &OnsetModel, setup: &SimulationSetup) -> Result<PowerCurve, PowerError> {
    model.validate()?;
    if setup.trials == 0 {
        return Err(PowerError::InvalidSetup("trials must be positive"));
    }
    setup.peaks.validate()?;
    let trial_offsets = (0..setup.trials)
        .into_par_iter()
        .map(|t| simulate_trial(model, setup, t))
        .collect::<Result<Vec<_>, _>>()?;

    let mut counts = std::collections::BTreeMap::<i64, usize>::new();
    for offsets in &trial_offsets {
        for &o in offsets {
            *counts.entry(o).or_default() += 1;
        }
    }
    let n = setup.trials as f64;
    let probabilities: Vec<f64> = counts.values().map(|&c| c as f64 / n).collect();
    Ok(PowerCurve {
        kind: CurveKind::MonteCarlo,
        detector: setup.detector.kind,
        offsets: counts.keys().copied().collect(),
        stderr: probabilities.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect(),
        probabilities,
        trials: setup.trials,
        seed: setup.seed,
        window_length: setup.detector.window_length,
        sample_rate: model.sample_rate,
        trial_offsets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_form(model: &OnsetModel, offset: f64) -> f64 {
        let t = offset / f64::from(model.sample_rate);
        let a = 2.0 * model.decay;
        let b = 4.0 * std::f64::consts::PI * model.frequency;
        let base = if a == 0.0 { t / 2.0 } else { (1.0 - (-a * t).exp()) / (2.0 * a) };
        let osc = if a == 0.0 && b == 0.0 {
            t / 2.0
        } else {
            ((-a * t).exp() * (-a * (b * t).cos() + b * (b * t).sin()) + a) / (2.0 * (a * a + b * b))
        };
        f64::from(model.sample_rate) * model.amplitude.powi(2) / model.noise_sd.powi(2) * (base + osc)
    }

    #[test]
    fn integral_constant_integrand() {
        let mut m = OnsetModel::reference();
        m.decay = 0.0;
        m.frequency = 0.0;
        for d in [1i64, 17, 4096] {
            let want = m.ssnr() * d as f64;
            let got = noncentrality_integral(&m, d).unwrap();
            assert!((got - want).abs() <= 1e-10 * want);
        }
        assert_eq!(noncentrality_integral(&m, 0).unwrap(), 0.0);
        assert!(matches!(
            noncentrality_integral(&m, -1),
            Err(PowerError::NegativeOffset(-1))
        ));
    }

    #[test]
    fn integral_matches_antiderivative() {
        let mut m = OnsetModel::reference();
        for (lam, f0) in [(1.25, 220.0), (8.0, 97.3), (0.0, 440.0), (30.0, 0.0)] {
            m.decay = lam;
            m.frequency = f0;
            for d in [5i64, 512, 4096, 48_000, 480_000] {
                let got = noncentrality_integral(&m, d).unwrap();
                let want = closed_form(&m, d as f64);
                assert!((got - want).abs() <= 1e-8 * want, "lam={lam} f0={f0} d={d}");
            }
        }
        // Limit as the window grows without bound.
        m.decay = 4.0;
        m.frequency = 50.0;
        let (a, b) = (8.0, 200.0 * std::f64::consts::PI);
        let limit = 48_000.0 * m.ssnr() * (1.0 / (2.0 * a) + a / (2.0 * (a * a + b * b)));
        let far = noncentrality_integral(&m, 48_000 * 20).unwrap();
        assert!((far - limit).abs() <= 1e-6 * limit);
    }

    #[test]
    fn integral_is_monotone() {
        let m = OnsetModel::reference();
        let mut last = 0.0;
        for d in (0..20_000).step_by(37) {
            let v = noncentrality_integral(&m, d).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn synth_degenerate_noise() {
        let m = OnsetModel {
            amplitude: 1.0,
            decay: 0.0,
            frequency: 0.0,
            noise_sd: 1e-9,
            sample_rate: 1000,
            onset_index: 50,
            length: 100,
        };
        let s = synth_signal(&m, 3).unwrap();
        assert!(s.samples()[..50].iter().all(|x| x.abs() < 1e-7));
        assert!(s.samples()[50..].iter().all(|x| (x - 1.0).abs() < 1e-7));
        assert_eq!(synth_signal(&m, 3).unwrap(), s);
        assert_ne!(synth_signal(&m, 4).unwrap(), s);
    }

    #[test]
    fn synth_sample_means() {
        let mut m = OnsetModel::reference();
        m.length = 24_700;
        let ks = [24_575usize, 24_576, 24_650];
        let mut sums = [0.0; 3];
        let reps = 10_000;
        for r in 0..reps {
            let s = synth_signal(&m, r).unwrap();
            for (sum, &k) in sums.iter_mut().zip(&ks) {
                *sum += s.samples()[k];
            }
        }
        for (sum, &k) in sums.iter().zip(&ks) {
            let mean = sum / reps as f64;
            assert!((mean - m.mean_at(k)).abs() < 4.0 * m.noise_sd / 100.0, "k={k}");
        }
    }

    #[test]
    fn model_validation() {
        let mut m = OnsetModel::reference();
        m.onset_index = m.length;
        assert!(m.validate().is_err());
        let mut m = OnsetModel::reference();
        m.noise_sd = 0.0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn false_positive_bound_shape() {
        assert_eq!(false_positive_upper_bound(0.0).unwrap(), 0.0);
        assert_eq!(false_positive_upper_bound(1.0).unwrap(), 0.5);
        assert!(false_positive_upper_bound(1.5).is_err());
        let mut last = -1.0;
        for i in 0..=100 {
            let v = false_positive_upper_bound(i as f64 / 100.0).unwrap();
            assert!(v > last && v <= 0.5);
            last = v;
        }
    }

    #[test]
    fn comparison_segments_cover_window_difference() {
        // T[k] - T[k + s] is the energy of X minus the energy of Y.
        for (shift, window) in [(512i64, 4096i64), (-512, 4096), (4096, 4096), (-6000, 4096), (3, 8)] {
            let ((xs, xe), (ys, ye)) = comparison_segments(0, shift, window);
            assert_eq!(xe - xs, ye - ys);
            let mut weight = std::collections::BTreeMap::<i64, i32>::new();
            for i in 0..window {
                *weight.entry(i).or_default() += 1;
                *weight.entry(i + shift).or_default() -= 1;
            }
            for i in xs..xe {
                *weight.entry(i).or_default() -= 1;
            }
            for i in ys..ye {
                *weight.entry(i).or_default() += 1;
            }
            assert!(weight.values().all(|&w| w == 0), "shift {shift}");
        }
    }

    #[test]
    fn bound_clamps_far_before_onset() {
        let m = OnsetModel::reference();
        let peaks = PeakConfig::symmetric(8);
        let mut setup = EnergyBoundSetup::new(&m, 4096, 512, &peaks);
        setup.draws = 2000;
        let p = energy_power_lower_bound(&m, &setup, -20_000).unwrap();
        assert_eq!(p.probability, 0.0);
        assert!(p.neighbor_probabilities.iter().all(|&q| q == 0.5));
    }

    #[test]
    fn bound_threshold_tail_saturates_with_signal() {
        let mut m = OnsetModel::reference();
        m.noise_sd = 1e-6;
        let setup = EnergyBoundSetup {
            window_length: 4096,
            hop: 512,
            neighbors: vec![-1, 1],
            threshold: 1e-3,
            draws: 1000,
            seed: 1,
        };
        let p = energy_power_lower_bound(&m, &setup, 100).unwrap();
        assert_eq!(p.threshold_tail, 1.0);
    }

    #[test]
    fn monte_carlo_with_huge_threshold_reports_nothing() {
        let mut m = OnsetModel::reference();
        m.amplitude = 0.0 + 1e-12;
        let mut setup = SimulationSetup::default_for(DetectorKind::SpectralDissimilarity, 20, 5);
        setup.peaks.threshold_scale = 1e12;
        let c = monte_carlo_power(&m, &setup).unwrap();
        assert!(c.offsets.is_empty());
        assert!(c.probabilities.iter().all(|&p| p == 0.0));
        assert_eq!(c.far_fraction(0.05), 0.0);
    }

    #[test]
    fn regions_are_maximal_runs() {
        let c = PowerCurve {
            kind: CurveKind::AnalyticLowerBound,
            detector: DetectorKind::Energy,
            offsets: vec![-2, -1, 0, 1, 2, 3],
            probabilities: vec![0.95, 0.1, 0.9, 0.99, 0.91, 0.2],
            stderr: vec![0.0; 6],
            trials: 1,
            seed: 0,
            window_length: 4096,
            sample_rate: 48_000,
            trial_offsets: Vec::new(),
        };
        assert_eq!(c.regions_at_least(0.9), vec![(-2, -2), (0, 2)]);
    }
}
