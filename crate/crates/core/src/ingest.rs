//! Audio to spectrum: energy-gated segment selection, Hann-windowed FFT,
//! peak picking with log-parabolic refinement, fundamental identification,
//! and ratio histograms over many analysed tones.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::export::fmt_num;
use crate::par::{map_slice, Execution};
use crate::timbre::Spectrum;
use crate::{Error, Result};

pub const MIN_SAMPLE_RATE: u32 = 8000;
/// Smallest analysis window accepted when it is chosen automatically.
pub const MIN_WINDOW: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub id: String,
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioClip {
    pub fn new(id: impl Into<String>, samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("audio clip has no samples"));
        }
        if sample_rate < MIN_SAMPLE_RATE {
            return Err(Error::invalid(format!(
                "sample rate {sample_rate} Hz is below {MIN_SAMPLE_RATE} Hz"
            )));
        }
        if let Some(s) = samples.iter().find(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(Error::invalid(format!("sample {s} outside [-1, 1]")));
        }
        Ok(AudioClip {
            id: id.into(),
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
}

/// Reads PCM WAV (integer or float); multichannel input is averaged to mono.
pub fn read_wav(path: &Path) -> Result<AudioClip> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    let channels = usize::from(spec.channels.max(1));
    let interleaved: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()?,
        hound::SampleFormat::Int => {
            let scale = f64::from(1u32 << (spec.bits_per_sample - 1).min(31));
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) / scale))
                .collect::<std::result::Result<_, _>>()?
        }
    };
    let mono = interleaved
        .chunks(channels)
        .map(|frame| (frame.iter().sum::<f64>() / frame.len() as f64).clamp(-1.0, 1.0))
        .collect();
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    AudioClip::new(id, mono, spec.sample_rate)
}

/// Writes a mono 32-bit float WAV.
pub fn write_wav(clip: &AudioClip, path: &Path) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut writer = hound::WavWriter::create(path, spec)?;
    for &s in &clip.samples {
        writer.write_sample(s as f32)?;
    }
    writer.finalize()?;
    Ok(())
}

/// Sums sinusoids at `(frequency, amplitude)` for `seconds`, scaled so the
/// peak cannot exceed 0.9, with 10 ms linear fades at both ends.
pub fn render_partials(
    id: impl Into<String>,
    partials: &[(f64, f64)],
    sample_rate: u32,
    seconds: f64,
) -> Result<AudioClip> {
    if sample_rate < MIN_SAMPLE_RATE {
        return Err(Error::invalid(format!(
            "sample rate {sample_rate} Hz is below {MIN_SAMPLE_RATE} Hz"
        )));
    }
    if !seconds.is_finite() || seconds <= 0.0 {
        return Err(Error::invalid("render length must be positive"));
    }
    let nyquist = f64::from(sample_rate) / 2.0;
    if let Some((f, _)) = partials
        .iter()
        .find(|(f, a)| !(*f > 0.0 && *f < nyquist) || *a < 0.0)
    {
        return Err(Error::invalid(format!(
            "partial at {f} Hz cannot be rendered"
        )));
    }
    let total: f64 = partials.iter().map(|(_, a)| a).sum();
    let gain = if total > 0.0 { 0.9 / total } else { 0.0 };
    let n = (seconds * f64::from(sample_rate)).round() as usize;
    let fade = ((0.01 * f64::from(sample_rate)) as usize).clamp(1, n.max(2) / 2);
    let sr = f64::from(sample_rate);
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / sr;
            let env = (i.min(n - 1 - i) as f64 / fade as f64).min(1.0);
            env * gain
                * partials
                    .iter()
                    .enumerate()
                    .map(|(k, (f, a))| a * (2.0 * PI * f * t + 0.7 * k as f64).sin())
                    .sum::<f64>()
        })
        .collect();
    AudioClip::new(id, samples, sample_rate)
}

/// Renders a timbre at a base frequency.
pub fn render_spectrum(
    spectrum: &Spectrum,
    base_frequency: f64,
    sample_rate: u32,
    seconds: f64,
) -> Result<AudioClip> {
    if !base_frequency.is_finite() || base_frequency <= 0.0 {
        return Err(Error::invalid("base frequency must be positive"));
    }
    render_partials(
        format!("{base_frequency}hz"),
        &spectrum.at(base_frequency),
        sample_rate,
        seconds,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FundamentalPolicy {
    /// The peak with the largest amplitude.
    #[default]
    LargestPeak,
    /// The lowest-frequency peak whose normalized amplitude reaches the threshold.
    LowestProminent(f64),
}

impl std::str::FromStr for FundamentalPolicy {
    type Err = Error;

    /// `largest` or `lowest:THRESHOLD`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "largest" || s == "largest-peak" {
            return Ok(FundamentalPolicy::LargestPeak);
        }
        if let Some(th) = s
            .strip_prefix("lowest:")
            .or_else(|| s.strip_prefix("lowest-prominent:"))
        {
            let th: f64 = th
                .parse()
                .map_err(|_| Error::invalid(format!("bad threshold '{th}'")))?;
            return Ok(FundamentalPolicy::LowestProminent(th));
        }
        Err(Error::invalid(format!(
            "unknown fundamental policy '{s}' (use 'largest' or 'lowest:THRESHOLD')"
        )))
    }
}

/// Tunables of [`analyze_clip_with`]; the defaults are stated choices, not measured ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    /// Power-of-two FFT length; `None` picks the largest one inside the gated segment.
    pub window_length: Option<usize>,
    pub fundamental: FundamentalPolicy,
    /// Segment starts where short-time RMS first reaches this fraction of its max.
    pub onset_gate: f64,
    /// Segment ends where short-time RMS last reaches this fraction of its max.
    pub release_gate: f64,
    /// RMS frame length in seconds.
    pub rms_frame: f64,
    pub max_peaks: usize,
    /// Peaks below this level relative to the strongest bin are ignored.
    pub noise_floor_db: f64,
    /// A peak must be the largest bin within this many bins on each side.
    pub neighborhood: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            window_length: None,
            fundamental: FundamentalPolicy::LargestPeak,
            onset_gate: 0.10,
            release_gate: 0.05,
            rms_frame: 0.01,
            max_peaks: 11,
            noise_floor_db: -60.0,
            neighborhood: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub frequency: f64,
    pub amplitude: f64,
}

/// Up to `max_peaks` spectral peaks in increasing frequency, max amplitude 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasuredSpectrum {
    pub id: String,
    pub peaks: Vec<Peak>,
    pub fundamental_index: Option<usize>,
    /// Frequency spacing of the transform that produced the peaks.
    pub bin_hz: f64,
}

impl MeasuredSpectrum {
    pub fn fundamental(&self) -> Option<Peak> {
        self.fundamental_index.map(|i| self.peaks[i])
    }

    /// `(frequency / fundamental, amplitude)` for every peak.
    pub fn ratios(&self) -> Option<Vec<(f64, f64)>> {
        let f0 = self.fundamental()?.frequency;
        Some(
            self.peaks
                .iter()
                .map(|p| (p.frequency / f0, p.amplitude))
                .collect(),
        )
    }

    pub fn to_csv(&self, round: Option<usize>) -> String {
        let mut out = String::from("frequency_hz,normalized_amplitude,is_fundamental\n");
        for (i, p) in self.peaks.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_num(p.frequency, round),
                fmt_num(p.amplitude, round),
                self.fundamental_index == Some(i)
            );
        }
        out
    }
}

/// Sample range `[start, end)` between the attack and the final release.
pub fn gated_segment(clip: &AudioClip, config: &AnalysisConfig) -> Option<(usize, usize)> {
    let frame = ((config.rms_frame * f64::from(clip.sample_rate)) as usize).max(1);
    let rms: Vec<f64> = clip
        .samples
        .chunks(frame)
        .map(|c| (c.iter().map(|s| s * s).sum::<f64>() / c.len() as f64).sqrt())
        .collect();
    let max = rms.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return None;
    }
    let first = rms.iter().position(|&r| r >= config.onset_gate * max)?;
    let last = rms.iter().rposition(|&r| r >= config.release_gate * max)?;
    Some((first * frame, ((last + 1) * frame).min(clip.len())))
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

fn magnitudes(segment: &[f64]) -> Vec<f64> {
    let n = segment.len();
    let mut buf: Vec<Complex<f64>> = segment
        .iter()
        .zip(hann(n))
        .map(|(s, w)| Complex::new(s * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf[..=n / 2].iter().map(|c| c.norm()).collect()
}

/// Log-parabolic vertex through three positive magnitudes: (offset, peak).
fn refine_peak(left: f64, mid: f64, right: f64) -> (f64, f64) {
    let floor = f64::MIN_POSITIVE;
    let (a, b, c) = (
        left.max(floor).ln(),
        mid.max(floor).ln(),
        right.max(floor).ln(),
    );
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return (0.0, mid);
    }
    let p = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
    (p, (b - 0.25 * (a - c) * p).exp())
}

fn pick_peaks(mags: &[f64], config: &AnalysisConfig) -> Vec<(f64, f64)> {
    let max = mags.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 || mags.len() < 3 {
        return Vec::new();
    }
    let floor = max * 10f64.powf(config.noise_floor_db / 20.0);
    let h = config.neighborhood.max(1);
    let mut found: Vec<(f64, f64)> = (1..mags.len() - 1)
        .filter(|&k| {
            let m = mags[k];
            m >= floor
                && m > 0.0
                && (k.saturating_sub(h)..k).all(|j| mags[j] < m)
                && (k + 1..=(k + h).min(mags.len() - 1)).all(|j| mags[j] <= m)
        })
        .map(|k| {
            let (p, a) = refine_peak(mags[k - 1], mags[k], mags[k + 1]);
            (k as f64 + p, a)
        })
        .collect();
    found.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.total_cmp(&y.0)));
    found.truncate(config.max_peaks);
    found.sort_by(|x, y| x.0.total_cmp(&y.0));
    found
}

fn choose_fundamental(peaks: &[Peak], policy: FundamentalPolicy) -> Option<usize> {
    match policy {
        FundamentalPolicy::LargestPeak => peaks
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.amplitude.total_cmp(&b.1.amplitude).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i),
        FundamentalPolicy::LowestProminent(th) => peaks.iter().position(|p| p.amplitude >= th),
    }
}

pub fn analyze_clip(
    clip: &AudioClip,
    window_length: Option<usize>,
    policy: FundamentalPolicy,
) -> Result<MeasuredSpectrum> {
    analyze_clip_with(
        clip,
        &AnalysisConfig {
            window_length,
            fundamental: policy,
            ..AnalysisConfig::default()
        },
    )
}

pub fn analyze_clip_with(clip: &AudioClip, config: &AnalysisConfig) -> Result<MeasuredSpectrum> {
    if let FundamentalPolicy::LowestProminent(th) = config.fundamental {
        if !(th > 0.0 && th <= 1.0) {
            return Err(Error::invalid(format!(
                "prominence threshold {th} outside (0, 1]"
            )));
        }
    }
    if !(0.0..=1.0).contains(&config.onset_gate) || !(0.0..=1.0).contains(&config.release_gate) {
        return Err(Error::invalid("gate levels must lie in [0, 1]"));
    }
    let segment = gated_segment(clip, config);
    let (start, end) = segment.unwrap_or((0, clip.len()));
    let n = match config.window_length {
        Some(n) => {
            if !n.is_power_of_two() || n < 4 {
                return Err(Error::invalid(format!(
                    "window length {n} is not a power of two"
                )));
            }
            if n > clip.len() {
                return Err(Error::invalid(format!(
                    "clip of {} samples is shorter than the {n}-sample window",
                    clip.len()
                )));
            }
            n
        }
        None => {
            let span = end - start;
            let n = if span == 0 { 0 } else { 1usize << span.ilog2() };
            if n < MIN_WINDOW {
                return Err(Error::invalid(format!(
                    "gated segment of {span} samples is too short to analyse"
                )));
            }
            n
        }
    };
    let bin_hz = f64::from(clip.sample_rate) / n as f64;
    let mut result = MeasuredSpectrum {
        id: clip.id.clone(),
        bin_hz,
        ..MeasuredSpectrum::default()
    };
    if segment.is_none() {
        return Ok(result);
    }
    let start = start.min(clip.len() - n);
    let raw = pick_peaks(&magnitudes(&clip.samples[start..start + n]), config);
    let top = raw.iter().map(|p| p.1).fold(0.0, f64::max);
    result.peaks = raw
        .into_iter()
        .map(|(bin, a)| Peak {
            frequency: bin * bin_hz,
            amplitude: if a == top { 1.0 } else { a / top },
        })
        .collect();
    result.fundamental_index = choose_fundamental(&result.peaks, config.fundamental);
    Ok(result)
}

/// Analyses clips independently; output order follows input order.
pub fn analyze_clips(
    clips: &[AudioClip],
    config: &AnalysisConfig,
    exec: Execution,
) -> Result<Vec<MeasuredSpectrum>> {
    map_slice(exec, clips, |c| analyze_clip_with(c, config))
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub center: f64,
    pub mean_amplitude: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RatioHistogram {
    pub bin_width: f64,
    /// Non-empty bins in increasing ratio.
    pub bins: Vec<HistogramBin>,
    /// Spectra left out because they have no fundamental.
    pub skipped: usize,
    pub contributions: usize,
}

impl RatioHistogram {
    /// Bins ordered by decreasing mean amplitude, excluding the bin holding ratio 1.
    pub fn strongest_overtone_bins(&self) -> Vec<HistogramBin> {
        let unit = (1.0 / self.bin_width).floor();
        let mut bins: Vec<HistogramBin> = self
            .bins
            .iter()
            .filter(|b| ((b.center / self.bin_width) - 0.5).round() != unit)
            .copied()
            .collect();
        bins.sort_by(|a, b| {
            b.mean_amplitude
                .total_cmp(&a.mean_amplitude)
                .then(a.center.total_cmp(&b.center))
        });
        bins
    }

    pub fn to_csv(&self, round: Option<usize>) -> String {
        let mut out = String::from("bin_center,mean_amplitude\n");
        for b in &self.bins {
            let _ = writeln!(
                out,
                "{},{}",
                fmt_num(b.center, round),
                fmt_num(b.mean_amplitude, round)
            );
        }
        out
    }
}

/// Mean normalized amplitude per bin of `frequency / fundamental`. Bin `k`
/// covers `[k·w, (k+1)·w)` and is reported at its center.
pub fn overtone_ratio_histogram(
    spectra: &[MeasuredSpectrum],
    bin_width: f64,
) -> Result<RatioHistogram> {
    if !bin_width.is_finite() || bin_width <= 0.0 {
        return Err(Error::invalid(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    let mut acc: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
    let mut hist = RatioHistogram {
        bin_width,
        ..RatioHistogram::default()
    };
    for s in spectra {
        let Some(ratios) = s.ratios() else {
            hist.skipped += 1;
            continue;
        };
        for (r, a) in ratios {
            let slot = acc
                .entry((r / bin_width).floor() as i64)
                .or_insert((0.0, 0));
            slot.0 += a;
            slot.1 += 1;
            hist.contributions += 1;
        }
    }
    hist.bins = acc
        .into_iter()
        .map(|(k, (sum, count))| HistogramBin {
            center: (k as f64 + 0.5) * bin_width,
            mean_amplitude: sum / count as f64,
            count,
        })
        .collect();
    Ok(hist)
}
