//! Harmonic-interval statistics over encoded performances.
//!
//! A piece is a list of simultaneous two-note intervals, each with a size in
//! semitones and a duration in beats. Distributions are kept over fixed bins
//! `0..=12` plus one aggregate bin for everything above an octave.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::export::{csv_rows, fmt_num};
use crate::par::{map_slice, Execution};
use crate::{Error, Result};

/// Number of distribution bins: sizes `0..=12` and the `>12` bucket.
pub const BINS: usize = 14;
/// Index of the `>12` bucket.
pub const OVER_OCTAVE: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalEvent {
    size: u32,
    duration: f64,
}

impl IntervalEvent {
    pub fn new(size: u32, duration: f64) -> Result<Self> {
        if !duration.is_finite() || duration <= 0.0 {
            return Err(Error::invalid(format!(
                "interval duration must be positive, got {duration}"
            )));
        }
        Ok(IntervalEvent { size, duration })
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Bin index, with every size above 12 in [`OVER_OCTAVE`].
    pub fn bin(&self) -> usize {
        (self.size as usize).min(OVER_OCTAVE)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub id: String,
    pub musician: String,
    pub events: Vec<IntervalEvent>,
}

impl Piece {
    pub fn new(
        id: impl Into<String>,
        musician: impl Into<String>,
        events: Vec<IntervalEvent>,
    ) -> Self {
        Piece {
            id: id.into(),
            musician: musician.into(),
            events,
        }
    }

    /// Parses the piece CSV `size_semitones,duration_beats`.
    pub fn parse(id: &str, musician: &str, text: &str, origin: &Path) -> Result<Piece> {
        let mut events = Vec::new();
        for (n, fields) in csv_rows(text, origin)? {
            if fields.len() != 2 {
                return Err(Error::parse(
                    origin,
                    n,
                    "expected 'size_semitones,duration_beats'",
                ));
            }
            if fields[0] == "size_semitones" {
                continue;
            }
            let size = fields[0].parse::<u32>().map_err(|_| {
                Error::parse(origin, n, format!("bad interval size '{}'", fields[0]))
            })?;
            let duration = fields[1]
                .parse::<f64>()
                .map_err(|_| Error::parse(origin, n, format!("bad duration '{}'", fields[1])))?;
            events.push(
                IntervalEvent::new(size, duration)
                    .map_err(|e| Error::parse(origin, n, e.to_string()))?,
            );
        }
        Ok(Piece::new(id, musician, events))
    }

    pub fn read(id: &str, musician: &str, path: &Path) -> Result<Piece> {
        let text = std::fs::read_to_string(path)?;
        Piece::parse(id, musician, &text, path)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("size_semitones,duration_beats\n");
        for e in &self.events {
            let _ = writeln!(out, "{},{}", e.size, e.duration);
        }
        out
    }
}

/// A note pair sounding from `onset` for `duration` beats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimelineEntry {
    pub onset: f64,
    pub duration: f64,
    pub size: u32,
}

/// Converts a timeline of simultaneous note pairs into interval events.
/// Entries are ordered by onset; overlapping entries are rejected since a
/// piece is read as one interval at a time.
pub fn events_from_timeline(entries: &[TimelineEntry]) -> Result<Vec<IntervalEvent>> {
    let mut sorted = entries.to_vec();
    if sorted.iter().any(|e| !e.onset.is_finite()) {
        return Err(Error::invalid("timeline onsets must be finite"));
    }
    sorted.sort_by(|a, b| a.onset.total_cmp(&b.onset));
    let mut end = f64::NEG_INFINITY;
    let mut out = Vec::with_capacity(sorted.len());
    for e in &sorted {
        if e.onset < end - 1e-9 {
            return Err(Error::invalid(format!(
                "timeline entry at beat {} overlaps the previous interval",
                e.onset
            )));
        }
        out.push(IntervalEvent::new(e.size, e.duration)?);
        end = e.onset + e.duration;
    }
    Ok(out)
}

/// Probability per bin; index `z` is size `z`, index 13 is `>12`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distribution(pub [f64; BINS]);

impl Distribution {
    pub fn get(&self, size: u32) -> f64 {
        self.0[(size as usize).min(OVER_OCTAVE)]
    }

    pub fn over_octave(&self) -> f64 {
        self.0[OVER_OCTAVE]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn label(bin: usize) -> String {
        if bin == OVER_OCTAVE {
            ">12".to_string()
        } else {
            bin.to_string()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    #[default]
    Occurrence,
    Duration,
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "occurrence" => Ok(Weighting::Occurrence),
            "duration" => Ok(Weighting::Duration),
            other => Err(Error::invalid(format!("unknown weighting '{other}'"))),
        }
    }
}

/// How [`corpus_average`] combines pieces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    /// Mean of the per-piece distributions, each piece counting equally.
    #[default]
    PerPiece,
    /// One distribution over all events of all pieces.
    Pooled,
}

fn weighted(events: &[IntervalEvent], weight: impl Fn(&IntervalEvent) -> f64) -> [f64; BINS] {
    let mut bins = [0.0; BINS];
    for e in events {
        bins[e.bin()] += weight(e);
    }
    bins
}

fn normalize(bins: [f64; BINS], id: &str) -> Result<Distribution> {
    let total: f64 = bins.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid(format!(
            "piece '{id}' has no interval events"
        )));
    }
    Ok(Distribution(bins.map(|b| b / total)))
}

/// `p_z = F_z / ΣF`.
pub fn occurrence_probabilities(piece: &Piece) -> Result<Distribution> {
    normalize(weighted(&piece.events, |_| 1.0), &piece.id)
}

/// `p_z = T_z / T`.
pub fn duration_probabilities(piece: &Piece) -> Result<Distribution> {
    normalize(weighted(&piece.events, |e| e.duration), &piece.id)
}

pub fn probabilities(piece: &Piece, weighting: Weighting) -> Result<Distribution> {
    match weighting {
        Weighting::Occurrence => occurrence_probabilities(piece),
        Weighting::Duration => duration_probabilities(piece),
    }
}

pub fn corpus_average(
    pieces: &[Piece],
    weighting: Weighting,
    averaging: Averaging,
) -> Result<Distribution> {
    corpus_average_with(pieces, weighting, averaging, Execution::default())
}

pub fn corpus_average_with(
    pieces: &[Piece],
    weighting: Weighting,
    averaging: Averaging,
    exec: Execution,
) -> Result<Distribution> {
    if pieces.is_empty() {
        return Err(Error::invalid("corpus has no pieces"));
    }
    match averaging {
        Averaging::PerPiece => {
            let dists = map_slice(exec, pieces, |p| probabilities(p, weighting))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            let n = dists.len() as f64;
            let mut sum = [0.0; BINS];
            for d in &dists {
                for (s, v) in sum.iter_mut().zip(d.0) {
                    *s += v;
                }
            }
            Ok(Distribution(sum.map(|s| s / n)))
        }
        Averaging::Pooled => {
            let events: Vec<IntervalEvent> = pieces
                .iter()
                .flat_map(|p| p.events.iter().copied())
                .collect();
            probabilities(&Piece::new("corpus", "", events), weighting)
        }
    }
}

/// One manifest line: piece id, musician and the event file location.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub id: String,
    pub musician: String,
    pub path: PathBuf,
}

/// Parses the manifest CSV `id,musician,path`; relative paths resolve
/// against the manifest's own directory.
pub fn parse_manifest(text: &str, origin: &Path) -> Result<Vec<ManifestEntry>> {
    let dir = origin.parent().unwrap_or_else(|| Path::new(""));
    let mut out = Vec::new();
    for (n, fields) in csv_rows(text, origin)? {
        if fields.len() != 3 || fields[2].is_empty() {
            return Err(Error::parse(origin, n, "expected 'id,musician,path'"));
        }
        if fields == ["id", "musician", "path"] {
            continue;
        }
        out.push(ManifestEntry {
            id: fields[0].clone(),
            musician: fields[1].clone(),
            path: dir.join(&fields[2]),
        });
    }
    Ok(out)
}

pub fn read_corpus(manifest: &Path) -> Result<Vec<Piece>> {
    let text = std::fs::read_to_string(manifest)?;
    parse_manifest(&text, manifest)?
        .iter()
        .map(|m| Piece::read(&m.id, &m.musician, &m.path))
        .collect()
}

/// Table view: one row per size (1..=12 then `>12`), one column per piece
/// and a final average column. Size 0 is hidden unless `include_unison`.
pub fn distribution_table_csv(
    ids: &[String],
    columns: &[Distribution],
    average: &Distribution,
    include_unison: bool,
    round: Option<usize>,
) -> String {
    let mut out = String::from("size");
    for id in ids {
        out.push(',');
        out.push_str(id);
    }
    out.push_str(",avg\n");
    let first = if include_unison { 0 } else { 1 };
    for bin in first..BINS {
        out.push_str(&Distribution::label(bin));
        for d in columns.iter().chain(std::iter::once(average)) {
            out.push(',');
            out.push_str(&fmt_num(d.0[bin], round));
        }
        out.push('\n');
    }
    out
}
