//! The `hum` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 invalid data or configuration, 3 I/O.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hum_core::peaks::symmetric_neighbors;
use hum_core::{Database, DetectorKind, OnsetSequence, SongRecord, ThresholdRule};

use crate::export::{self, ParseOnsetsError};
use crate::pipeline::PipelineConfig;
use crate::power::{self, EnergyBoundSetup, OnsetModel, PowerCurve, PowerError, SimulationSetup};
use crate::store::{self, StoreError};
use crate::wav::{self, WavError};

#[derive(Debug, Parser)]
#[command(name = "hum", version, about = "Find songs from hummed queries by their note onsets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the onset times detected in a WAV file.
    Detect(DetectArgs),
    /// Rank database songs against a hummed WAV or an onset list.
    Search(SearchArgs),
    /// Manage the song database.
    #[command(subcommand)]
    Db(DbCommand),
    /// Detection power analysis under the single-onset model.
    #[command(subcommand)]
    Power(PowerCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DetectorChoice {
    Energy,
    Sd,
    Dsd,
}

impl From<DetectorChoice> for DetectorKind {
    fn from(c: DetectorChoice) -> Self {
        match c {
            DetectorChoice::Energy => DetectorKind::Energy,
            DetectorChoice::Sd => DetectorKind::SpectralDissimilarity,
            DetectorChoice::Dsd => DetectorKind::DominantSpectralDissimilarity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThresholdChoice {
    Mean,
    Q3,
}

#[derive(Debug, Args)]
pub struct DetectorArgs {
    #[arg(long, value_enum, default_value = "energy")]
    pub detector: DetectorChoice,
    /// Window length in samples (power of two). Default 4096.
    #[arg(long)]
    pub window: Option<usize>,
    /// Hop in samples. Default 512 (energy) or 2048 (sd, dsd).
    #[arg(long)]
    pub hop: Option<usize>,
    /// Neighbor count r (offsets -r..r) or a comma list of offsets.
    #[arg(long, allow_hyphen_values = true)]
    pub neighbors: Option<String>,
    #[arg(long, value_enum)]
    pub threshold: Option<ThresholdChoice>,
    /// Multiplier on the mean threshold.
    #[arg(long)]
    pub threshold_scale: Option<f64>,
    /// Minimum spacing of reported onsets, seconds.
    #[arg(long)]
    pub min_gap: Option<f64>,
    /// Upper frequency of the spectral band, Hz.
    #[arg(long)]
    pub cutoff_hz: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    pub wav: PathBuf,
    #[command(flatten)]
    pub detector: DetectorArgs,
    /// Print a JSON array instead of one time per line.
    #[arg(long)]
    pub json: bool,
    /// Write the listing here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the detection series as CSV.
    #[arg(long)]
    pub series_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// A WAV recording, or a text/JSON file of onset times in seconds.
    pub query: PathBuf,
    #[arg(long)]
    pub db: PathBuf,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[arg(long, default_value_t = crate::pipeline::DEFAULT_TOP_K)]
    pub top: usize,
    #[arg(long, default_value_t = hum_core::search::DEFAULT_CLOSENESS)]
    pub closeness: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum DbCommand {
    /// Append a record, creating the file if needed.
    Add {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long)]
        title: String,
        /// Onsets in beats, comma or space separated.
        #[arg(long, allow_hyphen_values = true)]
        onsets: String,
    },
    /// Print id, title and onset count of every record.
    List {
        #[arg(long)]
        db: PathBuf,
        /// Print the database document instead.
        #[arg(long)]
        json: bool,
    },
    /// Check every record invariant.
    Validate {
        #[arg(long)]
        db: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Squared signal-to-noise ratio (A / sigma)^2.
    #[arg(long, default_value_t = power::REFERENCE_SSNR)]
    pub ssnr: f64,
    /// Decay rate of the note, per second.
    #[arg(long, default_value_t = OnsetModel::reference().decay)]
    pub decay: f64,
    /// Note frequency, Hz.
    #[arg(long, default_value_t = OnsetModel::reference().frequency)]
    pub freq: f64,
    #[arg(long, default_value_t = OnsetModel::reference().sample_rate)]
    pub sample_rate: u32,
    /// Onset sample index.
    #[arg(long, default_value_t = OnsetModel::reference().onset_index)]
    pub onset: usize,
    /// Signal length in samples.
    #[arg(long, default_value_t = OnsetModel::reference().length)]
    pub length: usize,
    /// Noise variance in squared 16-bit units.
    #[arg(long, default_value_t = power::REFERENCE_NOISE_VARIANCE)]
    pub noise_var: f64,
}

impl ModelArgs {
    fn model(&self) -> Result<OnsetModel, Failure> {
        if self.ssnr.is_nan() || self.ssnr <= 0.0 {
            return Err(Failure::Data("--ssnr must be positive".into()));
        }
        let noise_sd = self.noise_var.sqrt() / 32768.0;
        Ok(OnsetModel {
            amplitude: noise_sd * self.ssnr.sqrt(),
            decay: self.decay,
            frequency: self.freq,
            noise_sd,
            sample_rate: self.sample_rate,
            onset_index: self.onset,
            length: self.length,
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum PowerCommand {
    /// Analytic lower bound for the energy detector.
    Bound {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = hum_core::detect::DEFAULT_WINDOW)]
        window: usize,
        #[arg(long, default_value_t = hum_core::detect::DEFAULT_ENERGY_HOP)]
        hop: usize,
        /// Neighbor count r or a comma list of offsets.
        #[arg(long, allow_hyphen_values = true, default_value = "8")]
        neighbors: String,
        /// Energy threshold in units of sigma^2. Default: the SSNR.
        #[arg(long)]
        alpha_ratio: Option<f64>,
        /// First offset (window start minus onset), samples.
        #[arg(long, allow_hyphen_values = true, default_value_t = -400)]
        from: i64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 800)]
        to: i64,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        step: u64,
        /// Simulated draws per neighbor comparison.
        #[arg(long, default_value_t = power::DEFAULT_BOUND_DRAWS as u64,
              value_parser = clap::value_parser!(u64).range(1..))]
        draws: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo power of the full detector and peak picker.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        detector: DetectorArgs,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Near/far tolerance around the true onset, seconds.
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failed command with its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Io(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Io(m) => m,
        }
    }
}

impl From<hum_core::Error> for Failure {
    fn from(e: hum_core::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<WavError> for Failure {
    fn from(e: WavError) -> Self {
        match e {
            WavError::Unreadable(_) => Failure::Io(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<PowerError> for Failure {
    fn from(e: PowerError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<ParseOnsetsError> for Failure {
    fn from(e: ParseOnsetsError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                1
            } else {
                let _ = write!(stdout, "{}", e.render());
                0
            };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Detect(a) => cmd_detect(a, stdout),
        Command::Search(a) => cmd_search(a, stdout),
        Command::Db(c) => cmd_db(c, stdout),
        Command::Power(c) => cmd_power(c, stdout),
    }
}

fn parse_neighbors(text: &str) -> Result<Vec<i64>, Failure> {
    let bad = || Failure::Usage(format!("invalid --neighbors {text:?}: expected a count or a comma list"));
    let text = text.trim();
    if !text.contains(',') {
        if let Ok(r) = text.parse::<usize>() {
            return Ok(symmetric_neighbors(r));
        }
    }
    text.split(',')
        .map(|w| w.trim().parse::<i64>().map_err(|_| bad()))
        .collect()
}

impl DetectorArgs {
    fn pipeline(&self) -> Result<PipelineConfig, Failure> {
        let mut cfg = PipelineConfig::default_for(self.detector.into());
        if let Some(w) = self.window {
            cfg.detector.window_length = w;
        }
        if let Some(h) = self.hop {
            cfg.detector.hop = h;
        }
        if let Some(c) = self.cutoff_hz {
            cfg.detector.cutoff_hz = c;
        }
        if let Some(n) = &self.neighbors {
            cfg.peaks.neighbors = parse_neighbors(n)?;
        }
        if let Some(t) = self.threshold {
            cfg.peaks.threshold_rule = match t {
                ThresholdChoice::Mean => ThresholdRule::MeanScaled,
                ThresholdChoice::Q3 => ThresholdRule::ThirdQuartile,
            };
        }
        if let Some(s) = self.threshold_scale {
            cfg.peaks.threshold_scale = s;
        }
        if let Some(g) = self.min_gap {
            cfg.peaks.min_gap = g;
        }
        cfg.peaks.validate()?;
        Ok(cfg)
    }
}

/// Writes to `path`, or to `stdout` when absent.
fn emit(path: Option<&Path>, stdout: &mut dyn Write, body: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => Ok(stdout.write_all(body)?),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn cmd_detect(a: DetectArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let cfg = a.detector.pipeline()?;
    let signal = wav::load_wav(&a.wav)?;
    let series = cfg.series(&signal)?;
    let onsets = hum_core::peaks::detect_peaks(&series, &cfg.peaks)?;
    if let Some(p) = &a.series_csv {
        let mut w = create(p)?;
        export::write_series_csv(&series, &mut w)?;
        w.flush()?;
    }
    let body = if a.json {
        export::onsets_to_json(&onsets)
    } else {
        export::onsets_to_text(&onsets)
    };
    emit(a.out.as_deref(), stdout, body.as_bytes())
}

fn is_wav(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
}

fn cmd_search(a: SearchArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let mut cfg = a.detector.pipeline()?;
    cfg.top_k = a.top;
    cfg.closeness = a.closeness;
    let db = store::db_load(&a.db)?;
    let query = if is_wav(&a.query) {
        cfg.onsets(&wav::load_wav(&a.query)?)?
    } else {
        let text = std::fs::read_to_string(&a.query)
            .map_err(|e| Failure::Io(format!("{}: {e}", a.query.display())))?;
        OnsetSequence::seconds(export::parse_onsets(&text)?)?
    };
    if query.len() < 2 {
        return Err(Failure::Data(format!(
            "the query has {} onset(s) but at least 2 are needed; \
             re-record it with clearer note attacks or adjust the detector settings",
            query.len()
        )));
    }
    let result = cfg.rank(&db, &query)?;
    let body = if a.json {
        export::ranking_json(&result)
    } else {
        export::ranking_table(&result)
    };
    Ok(stdout.write_all(body.as_bytes())?)
}

fn cmd_db(c: DbCommand, stdout: &mut dyn Write) -> Result<(), Failure> {
    match c {
        DbCommand::Add { db, id, title, onsets } => {
            let mut database = if db.exists() {
                store::db_load(&db)?
            } else {
                Database::default()
            };
            let beats = export::parse_onsets(&onsets.replace(',', " "))?;
            let record = SongRecord::new(id.clone(), title, beats)
                .map_err(|e| Failure::Data(format!("record {id:?}: {e}")))?;
            database.insert(record)?;
            store::db_save(&database, &db)?;
            Ok(writeln!(stdout, "added {id:?} ({} records)", database.len())?)
        }
        DbCommand::List { db, json } => {
            let database = store::db_load(&db)?;
            if json {
                return Ok(stdout.write_all(store::db_to_string(&database).as_bytes())?);
            }
            for r in database.records() {
                writeln!(stdout, "{}\t{}\t{}", r.id(), r.title(), r.onsets().len())?;
            }
            Ok(())
        }
        DbCommand::Validate { db } => {
            let database = store::db_load(&db)?;
            Ok(writeln!(stdout, "ok: {} records", database.len())?)
        }
    }
}

fn format_regions(regions: &[(i64, i64)]) -> String {
    if regions.is_empty() {
        return "none".into();
    }
    regions
        .iter()
        .map(|(a, b)| format!("[{a}, {b}]"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn write_curve(curve: &PowerCurve, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Failure> {
    let mut csv = Vec::new();
    curve.write_csv(&mut csv)?;
    emit(out, stdout, &csv)
}

fn cmd_power(c: PowerCommand, stdout: &mut dyn Write) -> Result<(), Failure> {
    match c {
        PowerCommand::Bound {
            model,
            window,
            hop,
            neighbors,
            alpha_ratio,
            from,
            to,
            step,
            draws,
            seed,
            out,
        } => {
            if from > to {
                return Err(Failure::Usage("--from must not exceed --to".into()));
            }
            let model = model.model()?;
            model.validate()?;
            let sigma2 = model.noise_sd * model.noise_sd;
            let setup = EnergyBoundSetup {
                window_length: window,
                hop,
                neighbors: parse_neighbors(&neighbors)?,
                threshold: alpha_ratio.unwrap_or(model.ssnr()) * sigma2,
                draws: draws as usize,
                seed,
            };
            let offsets: Vec<i64> = (from..=to).step_by(step as usize).collect();
            let curve = power::energy_bound_curve(&model, &setup, &offsets)?;
            let p_alpha = power::noise_threshold_tail(&model, window, setup.threshold);
            let fp = power::false_positive_upper_bound(p_alpha)?;
            let summary = format!(
                "region with bound >= 0.9 (samples): {}\n\
                 noise window P(T > alpha): {p_alpha:.4e}\n\
                 false-positive upper bound: {fp:.4e}\n",
                format_regions(&curve.regions_at_least(0.9))
            );
            finish_power(&curve, out.as_deref(), &summary, stdout)
        }
        PowerCommand::Simulate {
            model,
            detector,
            trials,
            seed,
            tolerance,
            out,
        } => {
            let model = model.model()?;
            let cfg = detector.pipeline()?;
            let setup = SimulationSetup {
                detector: cfg.detector,
                peaks: cfg.peaks,
                trials: trials as usize,
                seed,
            };
            let curve = power::monte_carlo_power(&model, &setup)?;
            let summary = format!(
                "detector: {}\ntrials: {trials}\n\
                 offsets with probability >= 0.9 (samples): {}\n\
                 trials with an onset within {tolerance} s: {:.4}\n\
                 trials with an onset farther than {tolerance} s: {:.4}\n",
                curve.detector,
                format_regions(&curve.regions_at_least(0.9)),
                curve.near_fraction(tolerance),
                curve.far_fraction(tolerance)
            );
            finish_power(&curve, out.as_deref(), &summary, stdout)
        }
    }
}

/// With `--out` the CSV goes to the file and the summary to stdout;
/// otherwise the CSV goes to stdout and the summary is dropped to keep the
/// output parseable.
fn finish_power(
    curve: &PowerCurve,
    out: Option<&Path>,
    summary: &str,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    write_curve(curve, out, stdout)?;
    if out.is_some() {
        stdout.write_all(summary.as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbor_forms() {
        assert_eq!(parse_neighbors("2").unwrap(), vec![-2, -1, 1, 2]);
        assert_eq!(parse_neighbors("-3, 1,4").unwrap(), vec![-3, 1, 4]);
        assert!(parse_neighbors("x").is_err());
        assert!(parse_neighbors("1,,2").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
