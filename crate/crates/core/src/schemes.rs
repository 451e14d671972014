//! Harmonic-family schemes: which bar pairs may sound together, and how many
//! such pairs exist at each step distance on a marimba of a given size.
//!
//! A scheme is a 7-periodic labelling of the bars. Bars of one family may
//! be combined with each other; shared bars belong to both families and
//! discarded bars to neither. The labelling is tiled from a start offset
//! beginning at the lowest bar.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::par::{map_range, Execution};
use crate::{Error, Result};

/// Period of both schemes, in bars.
pub const PERIOD: usize = 7;
/// Largest step distance tabulated by default.
pub const DEFAULT_MAX_DISTANCE: usize = 7;
/// Marimba sizes covered by the reference table.
pub const REFERENCE_SIZES: std::ops::RangeInclusive<usize> = 14..=24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BarRole {
    FamilyA,
    FamilyB,
    /// Member of both families.
    Shared,
    Discarded,
}

impl BarRole {
    pub const ALL: [BarRole; 4] = [
        BarRole::FamilyA,
        BarRole::FamilyB,
        BarRole::Shared,
        BarRole::Discarded,
    ];

    pub fn symbol(self) -> char {
        match self {
            BarRole::FamilyA => 'A',
            BarRole::FamilyB => 'B',
            BarRole::Shared => 'C',
            BarRole::Discarded => 'X',
        }
    }

    pub fn from_symbol(c: char) -> Option<BarRole> {
        match c.to_ascii_uppercase() {
            'A' => Some(BarRole::FamilyA),
            'B' => Some(BarRole::FamilyB),
            'C' => Some(BarRole::Shared),
            'X' => Some(BarRole::Discarded),
            _ => None,
        }
    }

    fn in_a(self) -> bool {
        matches!(self, BarRole::FamilyA | BarRole::Shared)
    }

    fn in_b(self) -> bool {
        matches!(self, BarRole::FamilyB | BarRole::Shared)
    }

    /// Whether two bars share a family and may be played together.
    pub fn compatible(self, other: BarRole) -> bool {
        (self.in_a() && other.in_a()) || (self.in_b() && other.in_b())
    }

    fn swapped(self) -> BarRole {
        match self {
            BarRole::FamilyA => BarRole::FamilyB,
            BarRole::FamilyB => BarRole::FamilyA,
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// One bar per period discarded.
    Hexatonic,
    /// Two bars per period discarded.
    Pentatonic,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 2] = [SchemeKind::Hexatonic, SchemeKind::Pentatonic];

    pub fn discarded_per_period(self) -> usize {
        match self {
            SchemeKind::Hexatonic => 1,
            SchemeKind::Pentatonic => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Hexatonic => "hexatonic",
            SchemeKind::Pentatonic => "pentatonic",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hexatonic" => Ok(SchemeKind::Hexatonic),
            "pentatonic" => Ok(SchemeKind::Pentatonic),
            other => Err(Error::invalid(format!("unknown scheme '{other}'"))),
        }
    }
}

/// A periodic bar labelling; bar `i` (from the lowest) carries
/// `labels[(start_offset + i) % period]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SchemePattern {
    labels: Vec<BarRole>,
    start_offset: usize,
}

impl SchemePattern {
    pub fn new(labels: Vec<BarRole>, start_offset: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("scheme pattern needs at least one label"));
        }
        if start_offset >= labels.len() {
            return Err(Error::invalid(format!(
                "start offset {start_offset} outside period {}",
                labels.len()
            )));
        }
        Ok(SchemePattern {
            labels,
            start_offset,
        })
    }

    pub fn labels(&self) -> &[BarRole] {
        &self.labels
    }

    pub fn period(&self) -> usize {
        self.labels.len()
    }

    pub fn start_offset(&self) -> usize {
        self.start_offset
    }

    pub fn role_of(&self, bar: usize) -> BarRole {
        self.labels[(self.start_offset + bar) % self.labels.len()]
    }

    /// Checks the scheme rules: period 7, the right number of discarded
    /// bars, and both families non-empty.
    pub fn validate_scheme(&self, kind: SchemeKind) -> Result<()> {
        if self.labels.len() != PERIOD {
            return Err(Error::invalid(format!("scheme period must be {PERIOD}")));
        }
        let discarded = self
            .labels
            .iter()
            .filter(|r| **r == BarRole::Discarded)
            .count();
        if discarded != kind.discarded_per_period() {
            return Err(Error::invalid(format!(
                "{kind} scheme discards {} bar(s) per period, pattern has {discarded}",
                kind.discarded_per_period()
            )));
        }
        if !self.labels.iter().any(|r| r.in_a()) || !self.labels.iter().any(|r| r.in_b()) {
            return Err(Error::invalid(
                "both harmonic families need at least one bar",
            ));
        }
        Ok(())
    }

    pub fn swapped_families(&self) -> SchemePattern {
        SchemePattern {
            labels: self.labels.iter().map(|r| r.swapped()).collect(),
            start_offset: self.start_offset,
        }
    }
}

impl fmt::Display for SchemePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.labels {
            write!(f, "{}", r.symbol())?;
        }
        write!(f, " {}", self.start_offset)
    }
}

impl FromStr for SchemePattern {
    type Err = Error;

    /// `"ABABACX 5"`: labels, whitespace, start offset (offset defaults to 0).
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let word = parts
            .next()
            .ok_or_else(|| Error::invalid("empty pattern"))?;
        let labels = word
            .chars()
            .map(|c| {
                BarRole::from_symbol(c)
                    .ok_or_else(|| Error::invalid(format!("unknown bar label '{c}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        let offset = match parts.next() {
            Some(o) => o
                .parse()
                .map_err(|_| Error::invalid(format!("bad start offset '{o}'")))?,
            None => 0,
        };
        if parts.next().is_some() {
            return Err(Error::invalid("trailing text after pattern"));
        }
        SchemePattern::new(labels, offset)
    }
}

/// Number of compatible bar pairs `(i, i+s)` for `s = 1..=max_distance`
/// (index `s − 1`).
pub fn pair_counts(
    pattern: &SchemePattern,
    marimba_size: usize,
    max_distance: usize,
) -> Result<Vec<u32>> {
    if marimba_size < 2 {
        return Err(Error::invalid("a marimba needs at least 2 bars"));
    }
    if max_distance == 0 {
        return Err(Error::invalid("max distance must be at least 1"));
    }
    let roles: Vec<BarRole> = (0..marimba_size).map(|i| pattern.role_of(i)).collect();
    Ok((1..=max_distance)
        .map(|s| {
            roles
                .iter()
                .zip(roles.iter().skip(s))
                .filter(|(a, b)| a.compatible(**b))
                .count() as u32
        })
        .collect())
}

/// Pair counts per marimba size, each row indexed by distance − 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub sizes: Vec<usize>,
    pub rows: Vec<Vec<u32>>,
}

impl CountTable {
    pub fn for_pattern(
        pattern: &SchemePattern,
        sizes: &[usize],
        max_distance: usize,
    ) -> Result<Self> {
        let rows = sizes
            .iter()
            .map(|&n| pair_counts(pattern, n, max_distance))
            .collect::<Result<Vec<_>>>()?;
        Ok(CountTable {
            sizes: sizes.to_vec(),
            rows,
        })
    }

    fn max_distance(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn matches(&self, pattern: &SchemePattern) -> bool {
        self.sizes
            .iter()
            .zip(&self.rows)
            .all(|(&n, row)| pair_counts(pattern, n, row.len()).is_ok_and(|c| c == *row))
    }

    /// Layout: one row per distance, one column per marimba size.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("distance");
        for n in &self.sizes {
            let _ = write!(out, ",{n}");
        }
        out.push('\n');
        for d in 0..self.max_distance() {
            let _ = write!(out, "{}", d + 1);
            for row in &self.rows {
                match row.get(d) {
                    Some(c) => {
                        let _ = write!(out, ",{c}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }
}

// Reference counts by distance (outer) and size 14..=24 (inner).
const HEXATONIC_REFERENCE: [[u32; 11]; 7] = [
    [1, 2, 2, 2, 2, 2, 2, 2, 3, 3, 3],
    [9, 10, 10, 11, 11, 12, 13, 14, 15, 15, 16],
    [4, 5, 5, 6, 7, 7, 7, 7, 8, 8, 9],
    [5, 6, 6, 6, 6, 7, 7, 8, 9, 9, 9],
    [6, 7, 7, 8, 9, 10, 11, 11, 12, 12, 13],
    [2, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3],
    [6, 7, 7, 8, 9, 10, 11, 12, 13, 13, 14],
];

const PENTATONIC_REFERENCE: [[u32; 11]; 7] = [
    [2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3],
    [3, 4, 4, 4, 4, 4, 5, 5, 6, 6, 6],
    [5, 5, 6, 6, 7, 8, 8, 8, 8, 9, 9],
    [4, 5, 6, 6, 6, 6, 7, 7, 8, 9, 9],
    [3, 3, 3, 3, 4, 4, 5, 5, 5, 5, 5],
    [1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2],
    [5, 6, 7, 7, 8, 9, 10, 10, 11, 12, 12],
];

/// Published pair counts for marimbas of 14 to 24 bars.
pub fn reference_table(kind: SchemeKind) -> CountTable {
    let grid = match kind {
        SchemeKind::Hexatonic => &HEXATONIC_REFERENCE,
        SchemeKind::Pentatonic => &PENTATONIC_REFERENCE,
    };
    let sizes: Vec<usize> = REFERENCE_SIZES.collect();
    let rows = (0..sizes.len())
        .map(|col| grid.iter().map(|row| row[col]).collect())
        .collect();
    CountTable { sizes, rows }
}

fn decode_labels(mut index: usize) -> Vec<BarRole> {
    let mut labels = vec![BarRole::FamilyA; PERIOD];
    for slot in labels.iter_mut().rev() {
        *slot = BarRole::ALL[index % 4];
        index /= 4;
    }
    labels
}

/// Every valid `kind` pattern (labels and offset) whose counts equal `table`,
/// in lexicographic order of labels (A < B < C < X) then offset.
pub fn search_patterns(kind: SchemeKind, table: &CountTable) -> Vec<SchemePattern> {
    search_patterns_with(kind, table, Execution::default())
}

pub fn search_patterns_with(
    kind: SchemeKind,
    table: &CountTable,
    exec: Execution,
) -> Vec<SchemePattern> {
    map_range(exec, 4usize.pow(PERIOD as u32), |index| {
        let labels = decode_labels(index);
        let first = SchemePattern {
            labels,
            start_offset: 0,
        };
        if first.validate_scheme(kind).is_err() {
            return Vec::new();
        }
        (0..PERIOD)
            .map(|offset| SchemePattern {
                labels: first.labels.clone(),
                start_offset: offset,
            })
            .filter(|p| table.matches(p))
            .collect()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Lexicographically least pattern reproducing `table` exactly.
pub fn derive_canonical_pattern(kind: SchemeKind, table: &CountTable) -> Result<SchemePattern> {
    search_patterns(kind, table)
        .into_iter()
        .next()
        .ok_or_else(|| {
            Error::DataInconsistency(format!(
                "no {kind} labelling reproduces the reference pair counts"
            ))
        })
}

/// Derives both schemes from the built-in reference table.
pub fn derive_canonical_patterns() -> Result<(SchemePattern, SchemePattern)> {
    Ok((
        derive_canonical_pattern(
            SchemeKind::Hexatonic,
            &reference_table(SchemeKind::Hexatonic),
        )?,
        derive_canonical_pattern(
            SchemeKind::Pentatonic,
            &reference_table(SchemeKind::Pentatonic),
        )?,
    ))
}

/// The derived canonical patterns, pinned as constants.
pub fn canonical_pattern(kind: SchemeKind) -> SchemePattern {
    let text = match kind {
        SchemeKind::Hexatonic => "ABABACX 5",
        SchemeKind::Pentatonic => "ABCXABX 4",
    };
    text.parse().expect("built-in pattern is well formed")
}
