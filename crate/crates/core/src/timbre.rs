//! Timbres as fundamental-relative partial lists.
//!
//! A [`Spectrum`] stores frequency ratios to the fundamental and normalized
//! amplitudes; it is instantiated at an absolute base frequency only when
//! dissonance is computed.

use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

/// Overtone ratios of a free-free rectangular bar (first five transverse modes above the fundamental).
pub const BAR_OVERTONES: [f64; 5] = [2.758, 5.406, 8.936, 13.350, 18.645];

/// Odd harmonics of a closed pipe up to the 17th, excluding the fundamental.
pub const CLOSED_PIPE_OVERTONES: [f64; 8] = [3.0, 5.0, 7.0, 9.0, 11.0, 13.0, 15.0, 17.0];

/// Overtones kept for the measured composite timbre.
pub const EXPERIMENTAL_OVERTONES: [f64; 3] = [2.758, 5.000, 5.406];

/// Peak-height ratios `A_n / A_0` of the averaged measured spectrum.
pub const EXPERIMENTAL_AMPLITUDES: [f64; 3] = [0.16, 0.13, 0.06];

/// Amplitude of the first bar overtone relative to the fundamental.
pub const FIRST_OVERTONE_AMPLITUDE: f64 = 0.16;

/// Ratio-scale of the exponential amplitude decay.
pub const DECAY_SCALE: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partial {
    /// Frequency divided by the fundamental frequency.
    pub ratio: f64,
    /// Normalized linear amplitude in `[0, 1]`.
    pub amplitude: f64,
}

impl Partial {
    pub fn new(ratio: f64, amplitude: f64) -> Self {
        Partial { ratio, amplitude }
    }
}

/// How overtone amplitudes are assigned by the preset constructors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplitudeModel {
    /// All partials at amplitude 1.
    #[default]
    Equal,
    /// Fundamental at 1, overtones `0.16·exp(-(n − 2.758)/5)`.
    Exponential,
}

/// `A_n / A_0 = 0.16·exp(-(n − 2.758)/5)` for an overtone at ratio `n`.
pub fn exponential_amplitude(ratio: f64) -> f64 {
    FIRST_OVERTONE_AMPLITUDE * (-(ratio - BAR_OVERTONES[0]) / DECAY_SCALE).exp()
}

/// An ordered, normalized set of partials.
///
/// Invariants: the first ratio is exactly 1, ratios strictly increase,
/// amplitudes lie in `[0, 1]` and at least one equals 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    partials: Vec<Partial>,
}

impl Spectrum {
    /// Validates an already-normalized partial list.
    pub fn new(partials: Vec<Partial>) -> Result<Self> {
        if partials.is_empty() {
            return Err(Error::invalid("spectrum needs at least one partial"));
        }
        if partials[0].ratio != 1.0 {
            return Err(Error::invalid(format!(
                "first partial must be the fundamental (ratio 1), got {}",
                partials[0].ratio
            )));
        }
        for w in partials.windows(2) {
            if !(w[1].ratio > w[0].ratio) || !w[1].ratio.is_finite() {
                return Err(Error::invalid(format!(
                    "partial ratios must be finite and strictly increasing ({} then {})",
                    w[0].ratio, w[1].ratio
                )));
            }
        }
        let mut max = 0.0f64;
        for p in &partials {
            if !(0.0..=1.0).contains(&p.amplitude) {
                return Err(Error::invalid(format!(
                    "partial amplitude {} outside [0, 1]",
                    p.amplitude
                )));
            }
            max = max.max(p.amplitude);
        }
        if max != 1.0 {
            return Err(Error::invalid(format!(
                "spectrum is not normalized (max amplitude {max})"
            )));
        }
        Ok(Spectrum { partials })
    }

    /// Scales amplitudes so the largest is 1, then validates.
    pub fn normalized(mut partials: Vec<Partial>) -> Result<Self> {
        let max = partials.iter().map(|p| p.amplitude).fold(0.0, f64::max);
        if !(max > 0.0) || !max.is_finite() {
            return Err(Error::invalid("spectrum needs a positive finite amplitude"));
        }
        if partials.iter().any(|p| p.amplitude < 0.0) {
            return Err(Error::invalid("partial amplitudes must be non-negative"));
        }
        for p in &mut partials {
            p.amplitude /= max;
        }
        Spectrum::new(partials)
    }

    pub fn partials(&self) -> &[Partial] {
        &self.partials
    }

    pub fn len(&self) -> usize {
        self.partials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partials.is_empty()
    }

    pub fn ratios(&self) -> impl Iterator<Item = f64> + '_ {
        self.partials.iter().map(|p| p.ratio)
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.partials.iter().map(|p| p.amplitude)
    }

    /// Absolute `(frequency, amplitude)` pairs at the given fundamental.
    pub fn at(&self, base_frequency: f64) -> Vec<(f64, f64)> {
        self.partials
            .iter()
            .map(|p| (base_frequency * p.ratio, p.amplitude))
            .collect()
    }

    /// Same ratios with every amplitude set to 1.
    pub fn with_equal_amplitudes(&self) -> Spectrum {
        Spectrum {
            partials: self
                .partials
                .iter()
                .map(|p| Partial::new(p.ratio, 1.0))
                .collect(),
        }
    }

    /// Parses the two-column `ratio amplitude` text format. Columns may be
    /// separated by commas or whitespace; `#` starts a comment. Amplitudes
    /// are rescaled so the largest is 1.
    pub fn parse(text: &str, origin: &Path) -> Result<Spectrum> {
        let mut partials = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            if fields.len() != 2 {
                return Err(Error::parse(
                    origin,
                    n + 1,
                    "expected two columns: ratio, amplitude",
                ));
            }
            let (Ok(ratio), Ok(amplitude)) = (fields[0].parse::<f64>(), fields[1].parse::<f64>())
            else {
                // A non-numeric first row is a header.
                if partials.is_empty() {
                    continue;
                }
                return Err(Error::parse(origin, n + 1, "non-numeric partial"));
            };
            partials.push(Partial::new(ratio, amplitude));
        }
        Spectrum::normalized(partials).map_err(|e| match e {
            Error::InvalidInput(msg) => Error::parse(origin, 0, msg),
            other => other,
        })
    }

    pub fn read(path: &Path) -> Result<Spectrum> {
        let text = std::fs::read_to_string(path)?;
        Spectrum::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("ratio,amplitude\n");
        for p in &self.partials {
            let _ = writeln!(out, "{},{}", p.ratio, p.amplitude);
        }
        out
    }
}

fn with_overtones(overtones: &[f64], amplitudes: AmplitudeModel) -> Spectrum {
    let mut partials = vec![Partial::new(1.0, 1.0)];
    partials.extend(overtones.iter().map(|&n| {
        let a = match amplitudes {
            AmplitudeModel::Equal => 1.0,
            AmplitudeModel::Exponential => exponential_amplitude(n),
        };
        Partial::new(n, a)
    }));
    Spectrum::new(partials).expect("preset spectra satisfy the invariants")
}

/// Free-free bar: the fundamental plus the first `num_overtones` (1..=5) transverse modes.
pub fn bar_spectrum(num_overtones: usize, amplitudes: AmplitudeModel) -> Result<Spectrum> {
    if !(1..=BAR_OVERTONES.len()).contains(&num_overtones) {
        return Err(Error::invalid(format!(
            "bar spectrum supports 1..=5 overtones, got {num_overtones}"
        )));
    }
    Ok(with_overtones(&BAR_OVERTONES[..num_overtones], amplitudes))
}

/// Harmonic series `1, 2, …, num_partials`.
pub fn harmonic_spectrum(num_partials: usize, amplitudes: AmplitudeModel) -> Result<Spectrum> {
    if num_partials == 0 {
        return Err(Error::invalid(
            "harmonic spectrum needs at least one partial",
        ));
    }
    let overtones: Vec<f64> = (2..=num_partials).map(|n| n as f64).collect();
    Ok(with_overtones(&overtones, amplitudes))
}

/// Bar coupled to a closed-pipe resonator: bar modes merged with odd pipe harmonics (13 overtones).
pub fn bar_resonator_spectrum(amplitudes: AmplitudeModel) -> Spectrum {
    let mut overtones: Vec<f64> = BAR_OVERTONES
        .iter()
        .chain(CLOSED_PIPE_OVERTONES.iter())
        .copied()
        .collect();
    overtones.sort_by(f64::total_cmp);
    overtones.dedup();
    with_overtones(&overtones, amplitudes)
}

/// Three-overtone composite of the averaged measured spectra. With
/// `equal_amplitudes` all partials are set to 1 (low-register case).
pub fn experimental_spectrum(equal_amplitudes: bool) -> Spectrum {
    let mut partials = vec![Partial::new(1.0, 1.0)];
    for (&n, &a) in EXPERIMENTAL_OVERTONES.iter().zip(&EXPERIMENTAL_AMPLITUDES) {
        partials.push(Partial::new(n, if equal_amplitudes { 1.0 } else { a }));
    }
    Spectrum::new(partials).expect("preset spectra satisfy the invariants")
}
