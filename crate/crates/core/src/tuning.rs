//! Bar-tuning analysis: ratio statistics per step distance, isotonic scale
//! fitting, and cent/ratio conversions.
//!
//! The ratio between two bars is always the higher over the lower
//! fundamental, so every ratio is at least 1. Bars with an unidentified
//! fundamental are carried as `None` and excluded from every pair.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use crate::export::{csv_line, csv_rows, fmt_num};
use crate::{Error, Result};

/// Periods (in steps) considered by [`fit_isotonic`].
pub const DEFAULT_PERIODS: [u32; 3] = [7, 8, 9];

/// Cents per octave.
pub const CENTS_PER_OCTAVE: f64 = 1200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TuningKind {
    #[default]
    Traditional,
    Tempered,
}

impl fmt::Display for TuningKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TuningKind::Traditional => "traditional",
            TuningKind::Tempered => "tempered",
        })
    }
}

impl FromStr for TuningKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "traditional" => Ok(TuningKind::Traditional),
            "tempered" => Ok(TuningKind::Tempered),
            other => Err(Error::invalid(format!("unknown tuning kind '{other}'"))),
        }
    }
}

/// One instrument: bar fundamentals from low to high plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningRecord {
    pub id: String,
    pub maker: String,
    pub place: String,
    pub kind: TuningKind,
    fundamentals: Vec<Option<f64>>,
}

impl TuningRecord {
    pub fn new(
        id: impl Into<String>,
        maker: impl Into<String>,
        place: impl Into<String>,
        kind: TuningKind,
        fundamentals: Vec<Option<f64>>,
    ) -> Result<Self> {
        let mut last = 0.0;
        for f in fundamentals.iter().flatten() {
            if !f.is_finite() || *f <= 0.0 {
                return Err(Error::invalid(format!("bar frequency {f} is not positive")));
            }
            if *f <= last {
                return Err(Error::invalid(format!(
                    "bar fundamentals must increase from low to high ({last} then {f})"
                )));
            }
            last = *f;
        }
        Ok(TuningRecord {
            id: id.into(),
            maker: maker.into(),
            place: place.into(),
            kind,
            fundamentals,
        })
    }

    /// Unlabelled record, handy for synthetic data.
    pub fn from_frequencies(fundamentals: &[f64]) -> Result<Self> {
        TuningRecord::new(
            "",
            "",
            "",
            TuningKind::Traditional,
            fundamentals.iter().copied().map(Some).collect(),
        )
    }

    pub fn fundamentals(&self) -> &[Option<f64>] {
        &self.fundamentals
    }

    pub fn bars(&self) -> usize {
        self.fundamentals.len()
    }

    pub fn present(&self) -> usize {
        self.fundamentals.iter().flatten().count()
    }

    /// Ratios `f[i+s]/f[i]` over all pairs with both bars present.
    pub fn ratios_at(&self, distance: usize) -> Vec<f64> {
        if distance == 0 || distance >= self.fundamentals.len() {
            return Vec::new();
        }
        self.fundamentals
            .iter()
            .zip(&self.fundamentals[distance..])
            .filter_map(|(lo, hi)| Some(hi.as_ref()? / lo.as_ref()?))
            .collect()
    }

    /// Parses the record CSV: a `id,maker,place,kind` header, one metadata
    /// row, an optional `index,frequency_hz` header, then one `index,frequency`
    /// row per bar (empty or `*` frequency marks a missing bar).
    pub fn parse(text: &str, origin: &Path) -> Result<TuningRecord> {
        let mut rows = csv_rows(text, origin)?.into_iter();
        let (n, header) = rows
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "empty tuning file"))?;
        if header != ["id", "maker", "place", "kind"] {
            return Err(Error::parse(
                origin,
                n,
                "expected header 'id,maker,place,kind'",
            ));
        }
        let (n, meta) = rows
            .next()
            .ok_or_else(|| Error::parse(origin, n, "missing metadata row"))?;
        if meta.len() != 4 {
            return Err(Error::parse(origin, n, "metadata row needs 4 fields"));
        }
        let kind = meta[3]
            .parse()
            .map_err(|e: Error| Error::parse(origin, n, e.to_string()))?;

        let mut bars: Vec<(usize, Option<f64>)> = Vec::new();
        for (n, fields) in rows {
            if fields.len() != 2 {
                return Err(Error::parse(origin, n, "bar rows are 'index,frequency_hz'"));
            }
            let Ok(index) = fields[0].parse::<usize>() else {
                if bars.is_empty() && fields[0] == "index" {
                    continue;
                }
                return Err(Error::parse(
                    origin,
                    n,
                    format!("bad bar index '{}'", fields[0]),
                ));
            };
            let freq = match fields[1].as_str() {
                "" | "*" => None,
                s => Some(
                    s.parse::<f64>()
                        .map_err(|_| Error::parse(origin, n, format!("bad frequency '{s}'")))?,
                ),
            };
            if let Some(&(prev, _)) = bars.last() {
                if index != prev + 1 {
                    return Err(Error::parse(origin, n, "bar indices must be consecutive"));
                }
            }
            bars.push((index, freq));
        }
        let [id, maker, place, _] = <[String; 4]>::try_from(meta).expect("length checked above");
        TuningRecord::new(
            id,
            maker,
            place,
            kind,
            bars.into_iter().map(|(_, f)| f).collect(),
        )
        .map_err(|e| Error::parse(origin, 0, e.to_string()))
    }

    pub fn read(path: &Path) -> Result<TuningRecord> {
        let text = std::fs::read_to_string(path)?;
        TuningRecord::parse(&text, path)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,maker,place,kind\n");
        out.push_str(&csv_line([
            self.id.as_str(),
            self.maker.as_str(),
            self.place.as_str(),
            &self.kind.to_string(),
        ]));
        out.push_str("index,frequency_hz\n");
        for (i, f) in self.fundamentals.iter().enumerate() {
            match f {
                Some(f) => {
                    let _ = writeln!(out, "{},{}", i + 1, f);
                }
                None => {
                    let _ = writeln!(out, "{},", i + 1);
                }
            }
        }
        out
    }
}

/// Descriptive statistics of the bar ratios at one step distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioStats {
    pub distance: usize,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub avg: f64,
    /// Population standard deviation.
    pub sigma: f64,
    pub geometric_mean: f64,
}

impl RatioStats {
    fn from_ratios(distance: usize, ratios: &[f64]) -> Option<RatioStats> {
        if ratios.is_empty() {
            return None;
        }
        let n = ratios.len() as f64;
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // summation rounding can push the mean of equal values past them
        let avg = (ratios.iter().sum::<f64>() / n).clamp(min, max);
        let var = ratios.iter().map(|r| (r - avg).powi(2)).sum::<f64>() / n;
        Some(RatioStats {
            distance,
            count: ratios.len(),
            min,
            max,
            avg,
            sigma: var.sqrt(),
            geometric_mean: (ratios.iter().map(|r| r.ln()).sum::<f64>() / n).exp(),
        })
    }
}

/// Ratio statistics for distances `1..=max_distance`; distances without any
/// pair of present bars are omitted.
pub fn ratio_table(record: &TuningRecord, max_distance: usize) -> Result<Vec<RatioStats>> {
    if max_distance == 0 {
        return Err(Error::invalid("max distance must be at least 1"));
    }
    if record.present() < 2 {
        return Err(Error::invalid(format!(
            "record '{}' has fewer than 2 identified fundamentals",
            record.id
        )));
    }
    Ok((1..=max_distance)
        .filter_map(|s| RatioStats::from_ratios(s, &record.ratios_at(s)))
        .collect())
}

pub fn ratio_table_csv(stats: &[RatioStats], round: Option<usize>) -> String {
    let mut out = String::from("distance,count,min,max,avg,sigma\n");
    for s in stats {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.distance,
            s.count,
            fmt_num(s.min, round),
            fmt_num(s.max, round),
            fmt_num(s.avg, round),
            fmt_num(s.sigma, round)
        );
    }
    out
}

/// Scale whose ratio at distance `s` is `period_ratio^(s/period_steps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotonicScale {
    pub period_steps: u32,
    pub period_ratio: f64,
    /// Worst `|predicted − observed| / observed` over distances `1..=period_steps`.
    /// Zero for scales built directly with [`IsotonicScale::new`].
    pub max_relative_error: f64,
}

impl IsotonicScale {
    pub fn new(period_steps: u32, period_ratio: f64) -> Result<Self> {
        if period_steps == 0 {
            return Err(Error::invalid("scale period must be at least one step"));
        }
        if !period_ratio.is_finite() || period_ratio <= 1.0 {
            return Err(Error::invalid(format!(
                "period ratio must exceed 1, got {period_ratio}"
            )));
        }
        Ok(IsotonicScale {
            period_steps,
            period_ratio,
            max_relative_error: 0.0,
        })
    }

    pub fn ratio_at(&self, steps: u32) -> f64 {
        self.period_ratio
            .powf(f64::from(steps) / f64::from(self.period_steps))
    }

    /// Predicted ratios for distances `1..=max_steps`.
    pub fn predictions(&self, max_steps: u32) -> Vec<f64> {
        (1..=max_steps).map(|s| self.ratio_at(s)).collect()
    }

    fn relative_errors<'a>(
        &'a self,
        averages: &'a [(u32, f64)],
    ) -> impl Iterator<Item = (u32, f64)> + 'a {
        averages
            .iter()
            .filter(|(s, _)| *s >= 1 && *s <= self.period_steps)
            .map(|&(s, avg)| (s, (self.ratio_at(s) - avg).abs() / avg))
    }
}

/// Which per-distance average estimates the period ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PeriodEstimator {
    #[default]
    ArithmeticMean,
    GeometricMean,
}

fn check_candidates(candidates: &[u32]) -> Result<()> {
    if candidates.is_empty() {
        return Err(Error::invalid("no candidate periods given"));
    }
    if let Some(p) = candidates.iter().find(|p| !DEFAULT_PERIODS.contains(p)) {
        return Err(Error::invalid(format!(
            "candidate period {p} is not one of 7, 8, 9"
        )));
    }
    Ok(())
}

/// Fits an isotonic scale to per-distance average ratios `(distance, avg)`.
///
/// Each candidate period `p` takes `r_p` from the average at distance `p`;
/// the candidate with `r_p` closest to 2 wins (ties go to the smaller `p`).
pub fn fit_isotonic_from_averages(
    averages: &[(u32, f64)],
    candidates: &[u32],
) -> Result<IsotonicScale> {
    check_candidates(candidates)?;
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut best: Option<(u32, f64)> = None;
    for &p in &sorted {
        let Some(&(_, r)) = averages.iter().find(|(s, _)| *s == p) else {
            continue;
        };
        if !(r.is_finite() && r > 1.0) {
            continue;
        }
        // candidates are visited in increasing p, so near-ties keep the smaller one
        if best.is_none_or(|(_, b)| (r - 2.0).abs() < (b - 2.0).abs() - 1e-12) {
            best = Some((p, r));
        }
    }
    let Some((p, r)) = best else {
        return Err(Error::invalid(
            "no candidate period has pairs at its own distance",
        ));
    };
    let mut scale = IsotonicScale::new(p, r)?;
    scale.max_relative_error = scale
        .relative_errors(averages)
        .map(|(_, e)| e)
        .fold(0.0, f64::max);
    Ok(scale)
}

pub fn fit_isotonic(record: &TuningRecord, candidates: &[u32]) -> Result<IsotonicScale> {
    fit_isotonic_with(record, candidates, PeriodEstimator::default())
}

pub fn fit_isotonic_with(
    record: &TuningRecord,
    candidates: &[u32],
    estimator: PeriodEstimator,
) -> Result<IsotonicScale> {
    check_candidates(candidates)?;
    let max = candidates.iter().copied().max().unwrap_or(0) as usize;
    let averages: Vec<(u32, f64)> = ratio_table(record, max)?
        .iter()
        .map(|s| {
            let avg = match estimator {
                PeriodEstimator::ArithmeticMean => s.avg,
                PeriodEstimator::GeometricMean => s.geometric_mean,
            };
            (s.distance as u32, avg)
        })
        .collect();
    fit_isotonic_from_averages(&averages, candidates)
}

/// Per-distance comparison of a fitted scale against the observed table.
pub fn scale_table_csv(
    stats: &[RatioStats],
    scale: &IsotonicScale,
    round: Option<usize>,
) -> String {
    let mut out = String::from("distance,count,min,max,avg,sigma,predicted,relative_error\n");
    for s in stats
        .iter()
        .filter(|s| s.distance as u32 <= scale.period_steps)
    {
        let predicted = scale.ratio_at(s.distance as u32);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.distance,
            s.count,
            fmt_num(s.min, round),
            fmt_num(s.max, round),
            fmt_num(s.avg, round),
            fmt_num(s.sigma, round),
            fmt_num(predicted, round),
            fmt_num((predicted - s.avg).abs() / s.avg, round)
        );
    }
    out
}

/// `2^(cents/1200)`.
pub fn cents_to_ratio(cents: f64) -> f64 {
    (cents / CENTS_PER_OCTAVE).exp2()
}

/// `1200·log2(ratio)`.
pub fn ratio_to_cents(ratio: f64) -> Result<f64> {
    if !ratio.is_finite() || ratio <= 0.0 {
        return Err(Error::invalid(format!(
            "ratio must be positive, got {ratio}"
        )));
    }
    Ok(CENTS_PER_OCTAVE * ratio.log2())
}

/// Real frequency of a bar notated as a tempered pitch plus a cent deviation.
pub fn reconstruct_frequency(tempered_frequency: f64, deviation_cents: f64) -> Result<f64> {
    if !tempered_frequency.is_finite() || tempered_frequency <= 0.0 {
        return Err(Error::invalid(format!(
            "tempered frequency must be positive, got {tempered_frequency}"
        )));
    }
    if !deviation_cents.is_finite() {
        return Err(Error::invalid("cent deviation must be finite"));
    }
    Ok(tempered_frequency * cents_to_ratio(deviation_cents))
}

/// Nearest equal-tempered semitone count, `round(12·log2(ratio))`, halves away from zero.
pub fn semitone_size(ratio: f64) -> Result<i32> {
    if !ratio.is_finite() || ratio <= 0.0 {
        return Err(Error::invalid(format!(
            "ratio must be positive, got {ratio}"
        )));
    }
    Ok((12.0 * ratio.log2()).round() as i32)
}

/// Equal-tempered frequency of a note in scientific pitch notation
/// (`A4` = 440 Hz; accidentals `#` and `b`, e.g. `C#5`, `Bb3`).
pub fn note_frequency(name: &str) -> Result<f64> {
    let bad = || Error::invalid(format!("cannot parse note name '{name}'"));
    let mut chars = name.trim().chars().peekable();
    let letter = chars.next().ok_or_else(bad)?;
    let mut pc: i32 = match letter.to_ascii_uppercase() {
        'C' => 0,
        'D' => 2,
        'E' => 4,
        'F' => 5,
        'G' => 7,
        'A' => 9,
        'B' => 11,
        _ => return Err(bad()),
    };
    while let Some(&c) = chars.peek() {
        match c {
            '#' => pc += 1,
            'b' => pc -= 1,
            _ => break,
        }
        chars.next();
    }
    let octave: i32 = chars.collect::<String>().parse().map_err(|_| bad())?;
    let midi = 12 * (octave + 1) + pc;
    Ok(440.0 * (f64::from(midi - 69) / 12.0).exp2())
}

/// One row of a cent-deviation score transcription; `None` marks a bar
/// whose pitch could not be identified.
pub type CentsEntry = Option<(String, f64)>;

/// Parses `tempered_note_name,deviation_cents` rows. A header row is
/// skipped; `*` or an empty field marks a missing bar.
pub fn parse_cents_csv(text: &str, origin: &Path) -> Result<Vec<CentsEntry>> {
    let mut out = Vec::new();
    for (n, fields) in csv_rows(text, origin)? {
        if fields.len() != 2 {
            return Err(Error::parse(
                origin,
                n,
                "expected 'tempered_note_name,deviation_cents'",
            ));
        }
        if fields[0] == "tempered_note_name" {
            continue;
        }
        if fields[0].is_empty() || fields[0] == "*" || fields[1] == "*" {
            out.push(None);
            continue;
        }
        let cents = if fields[1].is_empty() {
            0.0
        } else {
            fields[1]
                .parse::<f64>()
                .map_err(|_| Error::parse(origin, n, format!("bad cents '{}'", fields[1])))?
        };
        note_frequency(&fields[0]).map_err(|e| Error::parse(origin, n, e.to_string()))?;
        out.push(Some((fields[0].clone(), cents)));
    }
    Ok(out)
}

/// Reconstructs bar fundamentals from tempered note names and cent deviations.
pub fn fundamentals_from_cents(entries: &[CentsEntry]) -> Result<Vec<Option<f64>>> {
    entries
        .iter()
        .map(|e| match e {
            Some((note, cents)) => reconstruct_frequency(note_frequency(note)?, *cents).map(Some),
            None => Ok(None),
        })
        .collect()
}
