mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use isotone::corpus::{self, Averaging, Weighting};
use isotone::curves::{self, AlphaGrid, DEFAULT_PROMINENCE};
use isotone::export::fmt_num;
use isotone::ingest::{self, AnalysisConfig, FundamentalPolicy};
use isotone::schemes::{self, CountTable, SchemeKind, SchemePattern};
use isotone::timbre::{self, AmplitudeModel};
use isotone::tuning::{self, IsotonicScale, PeriodEstimator, TuningRecord};
use isotone::{Model, Spectrum};

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

/// Dissonance curves, isotonic scale fitting and corpus statistics for
/// marimba tunings.
#[derive(Parser, Debug)]
#[command(name = "isotone", version, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Fixed number of digits after the decimal point (full precision when absent)
    #[arg(long, global = true, value_name = "N")]
    round: Option<usize>,

    /// Output file, written atomically (stdout when absent)
    #[arg(long, short, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a two-tone dissonance curve and locate its extrema
    Curve(CurveArgs),
    /// Numerical derivative dD/dα of a dissonance curve
    Derivative(SourceArgs),
    /// Curves over several base frequencies with family-wide normalization
    Family(FamilyArgs),
    /// Fit an isotonic scale to a tuning record
    FitScale(FitArgs),
    /// Ratio statistics per bar distance of a tuning record
    Ratios(RatiosArgs),
    /// Convert between cents and frequency ratios
    Cents(CentsArgs),
    /// Interval-size probabilities over a corpus of pieces
    Intervals(IntervalsArgs),
    /// Pair counts per distance for a family labeling scheme
    Scheme(SchemeArgs),
    /// Measure overtone spectra of recorded strikes
    Analyze(AnalyzeArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Preset {
    /// Free-free bar
    Bar,
    /// Bar coupled to a closed-pipe resonator
    BarResonator,
    /// Composite of measured spectra
    Experimental,
    /// Harmonic series
    Harmonic,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Amplitudes {
    Equal,
    Exponential,
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Named spectrum preset
    #[arg(
        required_unless_present = "spectrum_file",
        conflicts_with = "spectrum_file"
    )]
    preset: Option<Preset>,

    /// Two-column `ratio amplitude` file used instead of a preset
    #[arg(long, value_name = "PATH")]
    spectrum_file: Option<PathBuf>,

    /// Amplitude model for presets [default: equal for bar and harmonic,
    /// exponential for bar-resonator, measured for experimental]
    #[arg(long, value_enum)]
    amplitudes: Option<Amplitudes>,

    /// Overtones of the bar preset
    #[arg(long, default_value_t = 5)]
    overtones: usize,

    /// Partials of the harmonic preset
    #[arg(long, default_value_t = 6)]
    partials: usize,

    /// Frequency of the lower tone in Hz
    #[arg(long, default_value_t = 300.0)]
    base_hz: f64,

    /// Roughness model: sethares1993, vassilakis2001 or sethares2005
    #[arg(long, default_value = "sethares1993")]
    model: Model,

    /// Ratio grid as lo:hi:step
    #[arg(long, default_value = "1.0:2.3:0.001")]
    alpha: AlphaGrid,
}

impl SourceArgs {
    fn spectrum(&self) -> CliResult<Spectrum> {
        if let Some(path) = &self.spectrum_file {
            return with_path(path, Spectrum::read(path));
        }
        let amp = |default| match self.amplitudes.unwrap_or(default) {
            Amplitudes::Equal => AmplitudeModel::Equal,
            Amplitudes::Exponential => AmplitudeModel::Exponential,
        };
        Ok(
            match self.preset.expect("clap requires a preset or a file") {
                Preset::Bar => timbre::bar_spectrum(self.overtones, amp(Amplitudes::Equal))?,
                Preset::Harmonic => {
                    timbre::harmonic_spectrum(self.partials, amp(Amplitudes::Equal))?
                }
                Preset::BarResonator => {
                    timbre::bar_resonator_spectrum(amp(Amplitudes::Exponential))
                }
                Preset::Experimental => timbre::experimental_spectrum(matches!(
                    self.amplitudes,
                    Some(Amplitudes::Equal)
                )),
            },
        )
    }
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[command(flatten)]
    source: SourceArgs,

    /// Extrema CSV path [default: next to --output as <stem>.extrema.csv]
    #[arg(long, value_name = "PATH")]
    extrema: Option<PathBuf>,

    /// Minimum topographic prominence, as a fraction of the curve maximum
    #[arg(long, default_value_t = DEFAULT_PROMINENCE)]
    prominence: f64,

    /// Also render the normalized curve as SVG
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[command(flatten)]
    source: SourceArgs,

    /// Comma-separated base frequencies in Hz
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    bases: Vec<f64>,

    /// Isotonic scale whose steps are marked, as rP=VALUE (optionally ,p=P)
    #[arg(long, value_name = "rP=VALUE")]
    scale: Option<ScaleArg>,

    /// Directory receiving one curve CSV per base (plus steps.csv, family.svg)
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,

    /// Also write family.svg
    #[arg(long)]
    svg: bool,
}

#[derive(Clone, Debug)]
struct ScaleArg(IsotonicScale);

impl FromStr for ScaleArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut period = None;
        let mut ratio = None;
        for part in s.split(',').map(str::trim) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got '{part}'"))?;
            if key == "p" {
                let p: u32 = value.parse().map_err(|_| format!("bad period '{value}'"))?;
                if period.is_some_and(|q| q != p) {
                    return Err(format!(
                        "period p={p} disagrees with r{}",
                        period.unwrap_or(p)
                    ));
                }
                period = Some(p);
            } else if let Some(p) = key.strip_prefix('r') {
                let p: u32 = p.parse().map_err(|_| format!("bad period in '{key}'"))?;
                if period.is_some_and(|q| q != p) {
                    return Err(format!(
                        "period r{p} disagrees with p={}",
                        period.unwrap_or(p)
                    ));
                }
                period = Some(p);
                ratio = Some(
                    value
                        .parse::<f64>()
                        .map_err(|_| format!("bad ratio '{value}'"))?,
                );
            } else {
                return Err(format!("unknown scale key '{key}'"));
            }
        }
        let (Some(p), Some(r)) = (period, ratio) else {
            return Err("scale needs rP=VALUE".into());
        };
        IsotonicScale::new(p, r)
            .map(ScaleArg)
            .map_err(|e| e.to_string())
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Estimator {
    Arithmetic,
    Geometric,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Tuning record CSV
    record: PathBuf,

    /// Candidate periods (subset of 7, 8, 9)
    #[arg(long, value_delimiter = ',', default_value = "7,8,9")]
    periods: Vec<u32>,

    /// How per-distance ratios are averaged
    #[arg(long, value_enum, default_value = "arithmetic")]
    estimator: Estimator,
}

#[derive(Args, Debug)]
struct RatiosArgs {
    /// Tuning record CSV
    record: PathBuf,

    /// Largest bar distance
    #[arg(long, default_value_t = 7)]
    max_distance: usize,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct CentsArgs {
    /// Interval in cents, printed as a ratio
    #[arg(long, allow_negative_numbers = true)]
    cents: Option<f64>,

    /// Frequency ratio, printed in cents
    #[arg(long)]
    ratio: Option<f64>,
}

#[derive(Args, Debug)]
struct IntervalsArgs {
    /// Corpus manifest CSV (id,musician,path)
    manifest: PathBuf,

    /// occurrence or duration
    #[arg(long, default_value = "occurrence")]
    weighting: Weighting,

    /// Average per-piece distributions, or pool all events
    #[arg(long, value_enum, default_value = "per-piece")]
    averaging: AveragingArg,

    /// Include a row for repeated notes (size 0)
    #[arg(long)]
    include_unison: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AveragingArg {
    PerPiece,
    Pooled,
}

#[derive(Args, Debug)]
struct SchemeArgs {
    /// hexatonic or pentatonic
    #[arg(long)]
    scale: SchemeKind,

    /// Marimba sizes as lo:hi
    #[arg(long, default_value = "14:24")]
    sizes: SizeRange,

    /// Largest bar distance
    #[arg(long, default_value_t = schemes::DEFAULT_MAX_DISTANCE)]
    max_distance: usize,

    /// Labeling to count instead of the canonical one, e.g. "ABABACX 5"
    #[arg(long)]
    pattern: Option<SchemePattern>,
}

#[derive(Clone, Debug)]
struct SizeRange(Vec<usize>);

impl FromStr for SizeRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| format!("expected lo:hi, got '{s}'"))?;
        let lo: usize = lo.trim().parse().map_err(|_| format!("bad size '{lo}'"))?;
        let hi: usize = hi.trim().parse().map_err(|_| format!("bad size '{hi}'"))?;
        if lo == 0 || lo > hi {
            return Err(format!("empty size range '{s}'"));
        }
        Ok(SizeRange((lo..=hi).collect()))
    }
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// WAV files, one strike each
    #[arg(required = true)]
    wavs: Vec<PathBuf>,

    /// largest, or lowest:THRESHOLD (relative amplitude)
    #[arg(long, default_value = "largest")]
    fundamental_policy: FundamentalPolicy,

    /// Histogram bin width for overtone ratios
    #[arg(long, default_value_t = 0.25)]
    bin_width: f64,

    /// FFT length (power of two) [default: largest fitting the gated segment]
    #[arg(long)]
    window: Option<usize>,

    /// Directory receiving <stem>.csv per clip and histogram.csv
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // help and version exit 0, usage errors exit 2
        Err(e) => e.exit(),
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("ISOTONE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("ISOTONE_THREADS must be a positive integer, got '{value}'"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let round = cli.round;
    let output = cli.output.as_deref();
    match cli.command {
        Command::Curve(args) => {
            let spectrum = args.source.spectrum()?;
            let s = &args.source;
            let curve = curves::sample_curve(&spectrum, s.base_hz, &s.alpha, s.model)?;
            let extrema = curves::find_extrema(&curve, args.prominence);
            emit(output, &curve.to_csv(round))?;
            let extrema_path = args
                .extrema
                .or_else(|| output.map(|p| p.with_extension("extrema.csv")));
            if let Some(path) = extrema_path {
                write_atomic(&path, &curves::extrema_csv(&extrema, round))?;
            }
            if let Some(path) = args.svg {
                write_atomic(&path, &svg::plot(std::slice::from_ref(&curve), &[]))?;
            }
        }
        Command::Derivative(args) => {
            let spectrum = args.spectrum()?;
            let curve = curves::sample_curve(&spectrum, args.base_hz, &args.alpha, args.model)?;
            emit(
                output,
                &curves::derivative_csv(&curves::curve_derivative(&curve), round),
            )?;
        }
        Command::Family(args) => family(args, round)?,
        Command::FitScale(args) => {
            let record = with_path(&args.record, TuningRecord::read(&args.record))?;
            let estimator = match args.estimator {
                Estimator::Arithmetic => PeriodEstimator::ArithmeticMean,
                Estimator::Geometric => PeriodEstimator::GeometricMean,
            };
            let scale = tuning::fit_isotonic_with(&record, &args.periods, estimator)?;
            let stats = tuning::ratio_table(&record, scale.period_steps as usize)?;
            emit(output, &tuning::scale_table_csv(&stats, &scale, round))?;
            eprintln!(
                "period {} ratio {} max relative error {}",
                scale.period_steps,
                fmt_num(scale.period_ratio, round),
                fmt_num(scale.max_relative_error, round)
            );
        }
        Command::Ratios(args) => {
            let record = with_path(&args.record, TuningRecord::read(&args.record))?;
            let stats = tuning::ratio_table(&record, args.max_distance)?;
            emit(output, &tuning::ratio_table_csv(&stats, round))?;
        }
        Command::Cents(args) => {
            let value = match (args.cents, args.ratio) {
                (Some(c), _) => tuning::cents_to_ratio(c),
                (_, Some(r)) => tuning::ratio_to_cents(r)?,
                _ => unreachable!("clap requires one of --cents and --ratio"),
            };
            emit(output, &format!("{}\n", fmt_num(value, round)))?;
        }
        Command::Intervals(args) => {
            let pieces = with_path(&args.manifest, corpus::read_corpus(&args.manifest))?;
            let averaging = match args.averaging {
                AveragingArg::PerPiece => Averaging::PerPiece,
                AveragingArg::Pooled => Averaging::Pooled,
            };
            let columns = pieces
                .iter()
                .map(|p| corpus::probabilities(p, args.weighting))
                .collect::<isotone::Result<Vec<_>>>()?;
            let average = corpus::corpus_average(&pieces, args.weighting, averaging)?;
            let ids: Vec<String> = pieces.iter().map(|p| p.id.clone()).collect();
            emit(
                output,
                &corpus::distribution_table_csv(
                    &ids,
                    &columns,
                    &average,
                    args.include_unison,
                    round,
                ),
            )?;
        }
        Command::Scheme(args) => {
            let pattern = match args.pattern {
                Some(p) => {
                    p.validate_scheme(args.scale)?;
                    p
                }
                None => schemes::canonical_pattern(args.scale),
            };
            let table = CountTable::for_pattern(&pattern, &args.sizes.0, args.max_distance)?;
            emit(output, &table.to_csv())?;
        }
        Command::Analyze(args) => analyze(args, round)?,
    }
    Ok(())
}

fn family(args: FamilyArgs, round: Option<usize>) -> CliResult<()> {
    let s = &args.source;
    let spectrum = s.spectrum()?;
    let family = curves::curve_family(&spectrum, &args.bases, &s.alpha, s.model)?;
    fs::create_dir_all(&args.out_dir)?;
    for curve in &family {
        let name = format!("curve_{}.csv", fmt_num(curve.base_frequency, None));
        write_atomic(&args.out_dir.join(name), &curve.to_csv(round))?;
    }
    let mut markers = Vec::new();
    if let Some(ScaleArg(scale)) = &args.scale {
        let steps: Vec<u32> = (1..=scale.period_steps).collect();
        let mut csv = String::from("base_hz,step,alpha,raw,normalized\n");
        for curve in &family {
            let points = curves::dissonance_at_steps_normalized_by(
                &spectrum,
                curve.base_frequency,
                scale,
                &steps,
                s.model,
                curve.normalizer,
            )?;
            for p in points {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_num(curve.base_frequency, None),
                    p.step,
                    fmt_num(p.alpha, round),
                    fmt_num(p.raw, round),
                    fmt_num(p.normalized, round)
                ));
            }
        }
        write_atomic(&args.out_dir.join("steps.csv"), &csv)?;
        markers = steps.iter().map(|&k| scale.ratio_at(k)).collect();
    }
    if args.svg {
        write_atomic(
            &args.out_dir.join("family.svg"),
            &svg::plot(&family, &markers),
        )?;
    }
    Ok(())
}

fn analyze(args: AnalyzeArgs, round: Option<usize>) -> CliResult<()> {
    let clips = args
        .wavs
        .iter()
        .map(|p| with_path(p, ingest::read_wav(p)))
        .collect::<CliResult<Vec<_>>>()?;
    let config = AnalysisConfig {
        window_length: args.window,
        fundamental: args.fundamental_policy,
        ..AnalysisConfig::default()
    };
    let spectra = ingest::analyze_clips(&clips, &config, isotone::Execution::default())?;
    fs::create_dir_all(&args.out_dir)?;
    for (path, spectrum) in args.wavs.iter().zip(&spectra) {
        let stem = path
            .file_stem()
            .map_or("clip".into(), |s| s.to_string_lossy());
        write_atomic(
            &args.out_dir.join(format!("{stem}.csv")),
            &spectrum.to_csv(round),
        )?;
    }
    let histogram = ingest::overtone_ratio_histogram(&spectra, args.bin_width)?;
    if histogram.skipped > 0 {
        eprintln!(
            "warning: {} clip(s) without a fundamental left out of the histogram",
            histogram.skipped
        );
    }
    write_atomic(
        &args.out_dir.join("histogram.csv"),
        &histogram.to_csv(round),
    )?;
    Ok(())
}

/// Prefixes bare I/O failures with the file they concern; parse errors
/// already carry their location.
fn with_path<T>(path: &Path, result: isotone::Result<T>) -> CliResult<T> {
    result.map_err(|e| match e {
        isotone::Error::Io(io) => format!("{}: {io}", path.display()).into(),
        other => other.into(),
    })
}

/// Writes to `path` atomically, or to stdout when no path is given.
fn emit(path: Option<&Path>, contents: &str) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path)
        .map_err(|e| format!("cannot write {}: {}", path.display(), e.error))?;
    Ok(())
}
