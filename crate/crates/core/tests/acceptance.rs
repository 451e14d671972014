//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always show up in `cargo test` output.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use isotone::corpus::{
    corpus_average, duration_probabilities, occurrence_probabilities, read_corpus, Averaging,
    Distribution, Weighting,
};
use isotone::curves::{
    curve_family, dissonance_at_steps, find_extrema, sample_curve, two_tone_dissonance, AlphaGrid,
    ExtremumKind, DEFAULT_PROMINENCE,
};
use isotone::ingest::{analyze_clip, overtone_ratio_histogram, render_spectrum, FundamentalPolicy};
use isotone::roughness::RoughnessConstants;
use isotone::schemes::{
    derive_canonical_patterns, pair_counts, reference_table, SchemeKind, REFERENCE_SIZES,
};
use isotone::timbre::{
    bar_resonator_spectrum, bar_spectrum, experimental_spectrum, harmonic_spectrum, AmplitudeModel,
};
use isotone::tuning::{
    cents_to_ratio, fit_isotonic_from_averages, ratio_to_cents, DEFAULT_PERIODS,
};
use isotone::{pair_dissonance, IsotonicScale, Model, Partial, Spectrum, ToneComponent};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn within_time(start: Instant, limit: Duration) -> (bool, String) {
    let t = start.elapsed();
    (
        t < limit,
        format!("{:.2}s of {:.0}s", t.as_secs_f64(), limit.as_secs_f64()),
    )
}

fn bar_minima() -> Outcome {
    let start = Instant::now();
    let spectrum = bar_spectrum(5, AmplitudeModel::Equal).map_err(|e| e.to_string())?;
    let grid = AlphaGrid::new(1.0, 1.6, 0.001).unwrap();
    let curve =
        sample_curve(&spectrum, 300.0, &grid, Model::Sethares1993).map_err(|e| e.to_string())?;
    let minima: Vec<_> = find_extrema(&curve, DEFAULT_PROMINENCE)
        .into_iter()
        .filter(|e| e.kind == ExtremumKind::Minimum)
        .collect();
    let mut found = Vec::new();
    for target in [1.26, 1.40, 1.49] {
        match minima.iter().find(|m| (m.alpha - target).abs() <= 0.01) {
            Some(m) => found.push(*m),
            None => {
                return Err(format!(
                    "no minimum within 0.01 of {target}; minima {:?}",
                    alphas(&minima)
                ))
            }
        }
    }
    let widest = found[0].width > found[1].width && found[0].width > found[2].width;
    let (fast, time) = within_time(start, Duration::from_secs(2));
    check(
        widest && fast,
        format!(
            "minima {:.3}/{:.3}/{:.3}, widths {:.4}/{:.4}/{:.4}, {time}",
            found[0].alpha,
            found[1].alpha,
            found[2].alpha,
            found[0].width,
            found[1].width,
            found[2].width
        ),
    )
}

fn alphas(e: &[isotone::Extremum]) -> Vec<String> {
    e.iter().map(|m| format!("{:.3}", m.alpha)).collect()
}

fn resonator_minima() -> Outcome {
    let start = Instant::now();
    let spectrum = bar_resonator_spectrum(AmplitudeModel::Exponential);
    let mut notes = Vec::new();
    for model in Model::ALL {
        let curve = sample_curve(&spectrum, 300.0, &AlphaGrid::default(), model)
            .map_err(|e| e.to_string())?;
        let extrema = find_extrema(&curve, DEFAULT_PROMINENCE);
        let minima: Vec<_> = extrema
            .iter()
            .filter(|e| e.kind == ExtremumKind::Minimum)
            .copied()
            .collect();
        let mut hits = Vec::new();
        for target in [1.67, 1.81, 1.96] {
            match minima.iter().find(|m| (m.alpha - target).abs() <= 0.01) {
                Some(m) => hits.push(format!("{:.3}", m.alpha)),
                None => {
                    return Err(format!(
                        "{model}: no minimum near {target}; minima {:?}",
                        alphas(&minima)
                    ))
                }
            }
        }
        let (imax, _) = curve
            .normalized
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let peak = curve.alpha[imax];
        // the high-dissonance region (within 10% of the peak) must stay below 1.15
        let region_end = curve
            .alpha
            .iter()
            .zip(&curve.normalized)
            .filter(|(_, v)| **v >= 0.9)
            .map(|(a, _)| *a)
            .fold(f64::MIN, f64::max);
        if peak >= 1.15 || region_end >= 1.15 {
            return Err(format!(
                "{model}: maximum at {peak:.3}, high region to {region_end:.3}"
            ));
        }
        notes.push(format!("{model} {} max {peak:.3}", hits.join("/")));
    }
    let (fast, time) = within_time(start, Duration::from_secs(5));
    check(fast, format!("{}; {time}", notes.join("; ")))
}

fn equal_presets() -> Vec<(&'static str, Spectrum)> {
    vec![
        ("bar", bar_spectrum(5, AmplitudeModel::Equal).unwrap()),
        (
            "harmonic",
            harmonic_spectrum(6, AmplitudeModel::Equal).unwrap(),
        ),
        (
            "bar-resonator",
            bar_resonator_spectrum(AmplitudeModel::Equal),
        ),
        ("experimental", experimental_spectrum(true)),
    ]
}

fn model_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    let coarse = AlphaGrid::new(1.0, 2.3, 0.01).unwrap();
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for (_, spectrum) in equal_presets() {
        for _ in 0..5 {
            let base = rng.random_range(100.0..800.0);
            let norm: Vec<f64> = Model::ALL
                .iter()
                .map(|&m| sample_curve(&spectrum, base, &coarse, m).unwrap().max_raw())
                .collect();
            for _ in 0..25 {
                let alpha = rng.random_range(1.0..2.3);
                let v: Vec<f64> = Model::ALL
                    .iter()
                    .zip(&norm)
                    .map(|(&m, n)| two_tone_dissonance(&spectrum, base, alpha, m).unwrap() / n)
                    .collect();
                worst = worst.max((v[0] - v[1]).abs()).max((v[0] - v[2]).abs());
                points += 1;
            }
        }
    }
    check(
        worst <= 1e-9,
        format!("{points} points, worst normalized gap {worst:.2e}"),
    )
}

// Written from the model definitions, independently of the crate's kernel.
fn oracle_pair(f1: f64, a1: f64, f2: f64, a2: f64, model: Model) -> f64 {
    let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
    let (al, ah) = (a1.min(a2), a1.max(a2));
    let s = 0.24 / (0.0207 * lo + 18.96);
    let x = (hi - lo) * s;
    let w = match model {
        Model::Sethares1993 => a1 * a2,
        Model::Vassilakis2001 => {
            if al + ah == 0.0 {
                0.0
            } else {
                0.5 * (al * ah).powf(0.1) * (2.0 * al / (al + ah)).powf(3.11)
            }
        }
        Model::Sethares2005 => al.powf(0.6),
    };
    w * ((-3.5 * x).exp() - (-5.75 * x).exp())
}

fn oracle_two_tone(parts: &[(f64, f64)], base: f64, alpha: f64, model: Model) -> f64 {
    let lower: Vec<(f64, f64)> = parts.iter().map(|(r, a)| (base * r, *a)).collect();
    let upper: Vec<(f64, f64)> = parts.iter().map(|(r, a)| (alpha * base * r, *a)).collect();
    let mut total = 0.0;
    for tone in [&lower, &upper] {
        for i in 0..tone.len() {
            for j in i + 1..tone.len() {
                total += oracle_pair(tone[i].0, tone[i].1, tone[j].0, tone[j].1, model);
            }
        }
    }
    for &(f1, a1) in &lower {
        for &(f2, a2) in &upper {
            total += oracle_pair(f1, a1, f2, a2, model);
        }
    }
    total
}

fn oracle_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let m = rng.random_range(1..=6);
        let mut ratios = vec![1.0];
        while ratios.len() < m {
            let next = ratios.last().unwrap() + rng.random_range(0.05..2.0);
            ratios.push(next);
        }
        let mut amps: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        let top = rng.random_range(0..m);
        amps[top] = 1.0;
        let parts: Vec<(f64, f64)> = ratios.iter().copied().zip(amps.iter().copied()).collect();
        let spectrum = Spectrum::new(parts.iter().map(|&(r, a)| Partial::new(r, a)).collect())
            .map_err(|e| format!("spectrum {k}: {e}"))?;
        let base = rng.random_range(60.0..1000.0);
        let alpha = rng.random_range(1.0..2.5);
        let model = Model::ALL[k % 3];
        let got = two_tone_dissonance(&spectrum, base, alpha, model).map_err(|e| e.to_string())?;
        let want = oracle_two_tone(&parts, base, alpha, model);
        let rel = if want == 0.0 {
            got.abs()
        } else {
            ((got - want) / want).abs()
        };
        worst = worst.max(rel);
    }
    check(
        worst <= 1e-12,
        format!("100 spectra, worst relative gap {worst:.2e}"),
    )
}

fn stationary_point() -> Outcome {
    let c = RoughnessConstants::default();
    let s = 0.24 / (0.0207 * 300.0 + 18.96);
    let analytic = (c.b2 / c.b1).ln() / ((c.b2 - c.b1) * s);
    let lo = ToneComponent::new(300.0, 1.0).unwrap();
    let mut best = (0.0, f64::MIN);
    let mut df = 0.0;
    while df <= 100.0 {
        let hi = ToneComponent::new(300.0 + df, 1.0).unwrap();
        let d = pair_dissonance(lo, hi, Model::Sethares1993);
        if d > best.1 {
            best = (df, d);
        }
        df += 0.001;
    }
    check(
        (best.0 - analytic).abs() <= 0.05 && (analytic - 23.1).abs() <= 0.05,
        format!("scan {:.3} Hz, closed form {analytic:.3} Hz", best.0),
    )
}

struct Column {
    name: &'static str,
    averages: &'static [f64],
    printed: &'static [f64],
    period: u32,
}

// Per-distance average ratios and the printed theoretical scales, distance 1 first.
const MINANA: [Column; 10] = [
    Column {
        name: "Minana 1",
        averages: &[1.11, 1.22, 1.35, 1.48, 1.63, 1.80, 1.98],
        printed: &[1.10, 1.22, 1.34, 1.48, 1.63, 1.80, 1.98],
        period: 7,
    },
    Column {
        name: "Minana 2",
        averages: &[1.10, 1.22, 1.34, 1.48, 1.63, 1.80, 1.98],
        printed: &[1.10, 1.22, 1.34, 1.48, 1.63, 1.80, 1.98],
        period: 7,
    },
    Column {
        name: "Minana 3",
        averages: &[1.10, 1.21, 1.33, 1.46, 1.60, 1.76, 1.93],
        printed: &[1.10, 1.21, 1.33, 1.46, 1.60, 1.76, 1.93],
        period: 7,
    },
    Column {
        name: "Minana 4",
        averages: &[1.10, 1.21, 1.33, 1.46, 1.61, 1.76, 1.94],
        printed: &[1.10, 1.21, 1.33, 1.46, 1.61, 1.76, 1.94],
        period: 7,
    },
    Column {
        name: "Minana 5",
        averages: &[1.10, 1.20, 1.32, 1.46, 1.60, 1.76, 1.93],
        printed: &[1.10, 1.21, 1.33, 1.46, 1.60, 1.76, 1.93],
        period: 7,
    },
    Column {
        name: "Minana 6",
        averages: &[1.09, 1.19, 1.31, 1.44, 1.58, 1.74, 1.91],
        printed: &[1.10, 1.20, 1.32, 1.45, 1.59, 1.74, 1.91],
        period: 7,
    },
    Column {
        name: "Minana 7",
        averages: &[1.10, 1.21, 1.34, 1.47, 1.62, 1.78, 1.97],
        printed: &[1.10, 1.21, 1.34, 1.47, 1.62, 1.79, 1.97],
        period: 7,
    },
    Column {
        name: "Minana 8",
        averages: &[1.10, 1.20, 1.32, 1.46, 1.60, 1.75, 1.92],
        printed: &[1.10, 1.20, 1.32, 1.45, 1.59, 1.75, 1.92],
        period: 7,
    },
    Column {
        name: "Minana 9",
        averages: &[1.09, 1.20, 1.31, 1.44, 1.59, 1.74, 1.92],
        printed: &[1.10, 1.20, 1.32, 1.45, 1.59, 1.75, 1.92],
        period: 7,
    },
    Column {
        name: "Minana avg",
        averages: &[1.10, 1.21, 1.33, 1.46, 1.61, 1.77, 1.94],
        printed: &[1.10, 1.21, 1.33, 1.46, 1.61, 1.76, 1.94],
        period: 7,
    },
];

const PRESENT: [Column; 12] = [
    Column {
        name: "marimba 2",
        averages: &[1.11, 1.22, 1.35, 1.49, 1.64, 1.82, 2.01],
        printed: &[1.10, 1.22, 1.35, 1.49, 1.65, 1.82, 2.01],
        period: 7,
    },
    Column {
        name: "marimba 3",
        averages: &[1.10, 1.22, 1.35, 1.48, 1.64, 1.81, 2.00],
        printed: &[1.10, 1.22, 1.35, 1.49, 1.64, 1.81, 2.00],
        period: 7,
    },
    Column {
        name: "marimba 4",
        averages: &[1.10, 1.22, 1.34, 1.49, 1.65, 1.82, 2.00],
        printed: &[1.10, 1.22, 1.35, 1.49, 1.64, 1.81, 2.00],
        period: 7,
    },
    Column {
        name: "marimba 5",
        averages: &[1.11, 1.23, 1.35, 1.50, 1.66, 1.84, 2.03],
        printed: &[1.11, 1.22, 1.35, 1.50, 1.66, 1.83, 2.03],
        period: 7,
    },
    Column {
        name: "marimba 6",
        averages: &[1.10, 1.21, 1.33, 1.47, 1.62, 1.78, 1.96],
        printed: &[1.10, 1.21, 1.33, 1.47, 1.62, 1.78, 1.96],
        period: 7,
    },
    Column {
        name: "marimba 7",
        averages: &[1.10, 1.21, 1.34, 1.47, 1.62, 1.79, 1.97],
        printed: &[1.10, 1.21, 1.34, 1.47, 1.62, 1.79, 1.97],
        period: 7,
    },
    Column {
        name: "marimba 8",
        averages: &[1.11, 1.22, 1.34, 1.48, 1.64, 1.81, 2.01],
        printed: &[1.10, 1.22, 1.35, 1.49, 1.65, 1.82, 2.01],
        period: 7,
    },
    Column {
        name: "avg 2-8",
        averages: &[1.10, 1.22, 1.34, 1.48, 1.64, 1.81, 2.00],
        printed: &[1.10, 1.22, 1.35, 1.49, 1.64, 1.81, 2.00],
        period: 7,
    },
    Column {
        name: "marimba 9",
        averages: &[1.09, 1.20, 1.31, 1.43, 1.56, 1.71, 1.87, 2.04],
        printed: &[1.09, 1.20, 1.31, 1.43, 1.56, 1.71, 1.87, 2.04],
        period: 8,
    },
    Column {
        name: "marimba 10",
        averages: &[1.09, 1.20, 1.31, 1.44, 1.58, 1.73, 1.90, 2.08],
        printed: &[1.10, 1.20, 1.32, 1.44, 1.58, 1.73, 1.90, 2.08],
        period: 8,
    },
    Column {
        name: "avg 9-10",
        averages: &[1.09, 1.20, 1.31, 1.44, 1.57, 1.72, 1.89, 2.06],
        printed: &[1.09, 1.20, 1.31, 1.44, 1.57, 1.72, 1.88, 2.06],
        period: 8,
    },
    Column {
        name: "marimba 11",
        averages: &[1.08, 1.17, 1.26, 1.36, 1.46, 1.59, 1.71, 1.85, 1.99],
        printed: &[1.08, 1.17, 1.26, 1.36, 1.47, 1.58, 1.71, 1.84, 1.99],
        period: 9,
    },
];

fn isotonic_tables() -> Outcome {
    let mut worst_cell: (f64, &str) = (0.0, "");
    let mut worst_raw: (f64, &str) = (0.0, "");
    let mut worst_rounded: f64 = 0.0;
    let mut problems = Vec::new();
    for col in MINANA.iter().chain(PRESENT.iter()) {
        let averages: Vec<(u32, f64)> = col
            .averages
            .iter()
            .enumerate()
            .map(|(i, a)| (i as u32 + 1, *a))
            .collect();
        let scale =
            fit_isotonic_from_averages(&averages, &DEFAULT_PERIODS).map_err(|e| e.to_string())?;
        if scale.period_steps != col.period {
            problems.push(format!("{} classified p={}", col.name, scale.period_steps));
        }
        for (i, printed) in col.printed.iter().enumerate() {
            let gap = (scale.ratio_at(i as u32 + 1) - printed).abs();
            if gap > worst_cell.0 {
                worst_cell = (gap, col.name);
            }
            if gap > 0.005 + 1e-9 {
                problems.push(format!(
                    "{} distance {}: {:.4} vs {printed}",
                    col.name,
                    i + 1,
                    scale.ratio_at(i as u32 + 1)
                ));
            }
        }
        if scale.max_relative_error > worst_raw.0 {
            worst_raw = (scale.max_relative_error, col.name);
        }
        // printed averages carry +-0.005 display rounding
        for &(s, avg) in averages.iter().filter(|(s, _)| *s <= scale.period_steps) {
            let e = ((scale.ratio_at(s) - avg).abs() - 0.005).max(0.0) / avg;
            worst_rounded = worst_rounded.max(e);
        }
    }
    if worst_rounded > 0.01 {
        problems.push(format!(
            "relative error {:.2}% above 1%",
            100.0 * worst_rounded
        ));
    }
    let detail = format!(
        "22 columns; worst cell gap {:.4} ({}); max rel. error {:.2}% rounding-aware, {:.2}% raw ({})",
        worst_cell.0,
        worst_cell.1,
        100.0 * worst_rounded,
        100.0 * worst_raw.0,
        worst_raw.1
    );
    if problems.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", problems.join("; ")))
    }
}

fn cents_round_trip() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut e = -2400.0;
    while e <= 2400.0 {
        let back = ratio_to_cents(cents_to_ratio(e)).map_err(|x| x.to_string())?;
        worst = worst.max((back - e).abs() / e.abs().max(1.0));
        e += 0.37;
    }
    let octave = (cents_to_ratio(1200.0) - 2.0).abs();
    check(
        worst <= 1e-12 && octave <= 1e-12,
        format!("worst relative gap {worst:.2e}, |r(1200) - 2| = {octave:.1e}"),
    )
}

// Published probability columns, pieces 1..7 then the printed average; rows 1..12 then >12.
const OCCURRENCE: [[f64; 8]; 13] = [
    [0.0; 8],
    [0.0; 8],
    [0.24, 0.59, 0.53, 0.13, 0.55, 0.23, 0.55, 0.40],
    [0.08, 0.41, 0.47, 0.12, 0.44, 0.26, 0.37, 0.31],
    [0.23, 0.0, 0.0, 0.30, 0.0, 0.34, 0.07, 0.13],
    [0.0, 0.0, 0.0, 0.01, 0.0, 0.0, 0.02, 0.00],
    [0.07, 0.0, 0.0, 0.17, 0.01, 0.15, 0.0, 0.06],
    [0.21, 0.0, 0.0, 0.03, 0.0, 0.0, 0.0, 0.03],
    [0.13, 0.0, 0.0, 0.02, 0.0, 0.0, 0.0, 0.02],
    [0.0, 0.0, 0.0, 0.15, 0.0, 0.0, 0.0, 0.02],
    [0.0; 8],
    [0.05, 0.0, 0.0, 0.07, 0.0, 0.02, 0.0, 0.02],
    [0.0, 0.0, 0.0, 0.01, 0.0, 0.0, 0.0, 0.00],
];

const DURATION: [[f64; 8]; 13] = [
    [0.0; 8],
    [0.0; 8],
    [0.19, 0.60, 0.52, 0.13, 0.56, 0.23, 0.54, 0.39],
    [0.08, 0.40, 0.48, 0.12, 0.43, 0.26, 0.35, 0.30],
    [0.26, 0.0, 0.0, 0.33, 0.0, 0.34, 0.07, 0.14],
    [0.0, 0.0, 0.0, 0.01, 0.0, 0.0, 0.03, 0.01],
    [0.05, 0.0, 0.0, 0.20, 0.0, 0.15, 0.0, 0.06],
    [0.17, 0.0, 0.0, 0.02, 0.0, 0.0, 0.0, 0.03],
    [0.20, 0.0, 0.0, 0.02, 0.0, 0.0, 0.0, 0.03],
    [0.01, 0.0, 0.0, 0.12, 0.0, 0.0, 0.0, 0.02],
    [0.0; 8],
    [0.04, 0.0, 0.0, 0.06, 0.0, 0.02, 0.0, 0.02],
    [0.0, 0.0, 0.0, 0.01, 0.0, 0.0, 0.0, 0.00],
];

fn table_gaps(
    columns: &[Distribution],
    average: &Distribution,
    printed: &[[f64; 8]; 13],
) -> (f64, usize) {
    let mut worst: f64 = 0.0;
    let mut cells = 0;
    for (row, values) in printed.iter().enumerate() {
        let bin = row + 1;
        for (c, dist) in columns.iter().chain(std::iter::once(average)).enumerate() {
            worst = worst.max((dist.0[bin] - values[c]).abs());
            cells += 1;
        }
    }
    (worst, cells)
}

fn interval_statistics() -> Outcome {
    let pieces = read_corpus(&fixtures().join("pieces/manifest.csv")).map_err(|e| e.to_string())?;
    let occ: Vec<Distribution> = pieces
        .iter()
        .map(|p| occurrence_probabilities(p).unwrap())
        .collect();
    let dur: Vec<Distribution> = pieces
        .iter()
        .map(|p| duration_probabilities(p).unwrap())
        .collect();
    let occ_avg = corpus_average(&pieces, Weighting::Occurrence, Averaging::PerPiece)
        .map_err(|e| e.to_string())?;
    let dur_avg = corpus_average(&pieces, Weighting::Duration, Averaging::PerPiece)
        .map_err(|e| e.to_string())?;
    let (wo, n1) = table_gaps(&occ, &occ_avg, &OCCURRENCE);
    let (wd, n2) = table_gaps(&dur, &dur_avg, &DURATION);
    let seconds_zero = occ
        .iter()
        .chain(&dur)
        .chain([&occ_avg, &dur_avg])
        .all(|d| d.get(1) == 0.0 && d.get(2) == 0.0);
    let octave = occ_avg.get(12);
    check(
        wo <= 0.005 + 1e-12 && wd <= 0.005 + 1e-12 && seconds_zero && (octave - 0.02).abs() <= 0.005,
        format!(
            "{} cells, worst gap {:.4} occurrence / {:.4} duration; octave share {octave:.4}; sizes 1-2 zero: {seconds_zero}",
            n1 + n2,
            wo,
            wd
        ),
    )
}

fn scheme_counts() -> Outcome {
    let start = Instant::now();
    let (hex, pent) = derive_canonical_patterns().map_err(|e| e.to_string())?;
    let (fast, time) = within_time(start, Duration::from_secs(10));
    let mut cells = 0;
    let mut wrong = 0;
    for (kind, pattern) in [
        (SchemeKind::Hexatonic, &hex),
        (SchemeKind::Pentatonic, &pent),
    ] {
        let table = reference_table(kind);
        for (n, row) in REFERENCE_SIZES.zip(&table.rows) {
            let counts = pair_counts(pattern, n, 7).map_err(|e| e.to_string())?;
            for (a, b) in counts.iter().zip(row) {
                cells += 1;
                wrong += usize::from(a != b);
            }
        }
    }
    check(
        cells == 154 && wrong == 0 && fast,
        format!(
            "hexatonic {hex}, pentatonic {pent}; {} of {cells} cells match; search {time}",
            cells - wrong
        ),
    )
}

fn ingestion_round_trip() -> Outcome {
    let spectrum = experimental_spectrum(false);
    let mut worst_f: f64 = 0.0;
    let mut worst_a: f64 = 0.0;
    let mut measured = Vec::new();
    for base in [300.0, 366.0, 440.0] {
        let clip = render_spectrum(&spectrum, base, 48_000, 1.0).map_err(|e| e.to_string())?;
        let m =
            analyze_clip(&clip, None, FundamentalPolicy::LargestPeak).map_err(|e| e.to_string())?;
        let f0 = m.fundamental().ok_or("no fundamental")?;
        for p in spectrum.partials() {
            let want = base * p.ratio;
            let hit = m
                .peaks
                .iter()
                .min_by(|a, b| {
                    (a.frequency - want)
                        .abs()
                        .total_cmp(&(b.frequency - want).abs())
                })
                .ok_or("no peaks")?;
            worst_f = worst_f.max((hit.frequency - want).abs() / want);
            worst_a = worst_a.max((hit.amplitude - p.amplitude).abs() / p.amplitude);
        }
        if (f0.frequency - base).abs() / base > 0.005 {
            return Err(format!(
                "fundamental {:.2} Hz for base {base}",
                f0.frequency
            ));
        }
        measured.push(m);
    }
    // a wider synthetic corpus for the histogram
    for base in [280.0, 320.0, 350.0, 390.0, 410.0, 480.0, 520.0] {
        let clip = render_spectrum(&spectrum, base, 44_100, 0.8).map_err(|e| e.to_string())?;
        measured.push(
            analyze_clip(&clip, None, FundamentalPolicy::LargestPeak).map_err(|e| e.to_string())?,
        );
    }
    let hist = overtone_ratio_histogram(&measured, 0.4).map_err(|e| e.to_string())?;
    let top: Vec<f64> = hist
        .strongest_overtone_bins()
        .iter()
        .take(3)
        .map(|b| b.center)
        .collect();
    let mut sorted = top.clone();
    sorted.sort_by(f64::total_cmp);
    let near = sorted.len() == 3
        && sorted
            .iter()
            .zip([2.7, 5.0, 5.4])
            .all(|(c, t)| (c - t).abs() <= 0.2 + 1e-9);
    check(
        worst_f <= 0.005 && worst_a <= 0.10 && near,
        format!(
            "worst frequency error {:.3}%, amplitude error {:.2}%; top histogram bins {:?}",
            100.0 * worst_f,
            100.0 * worst_a,
            top.iter().map(|c| format!("{c:.1}")).collect::<Vec<_>>()
        ),
    )
}

fn transposition() -> Outcome {
    let bases = [332.8, 366.0, 402.6];
    let scale = IsotonicScale::new(7, 2.0).unwrap();
    let mut notes = Vec::new();
    for equal in [false, true] {
        let spectrum = experimental_spectrum(equal);
        for model in Model::ALL {
            for base in bases {
                let d = dissonance_at_steps(&spectrum, base, &scale, &[2, 3, 4, 5], model)
                    .map_err(|e| e.to_string())?;
                let v: Vec<f64> = d.iter().map(|s| s.normalized).collect();
                let argmax = (0..4).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
                let argmin = (0..4).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
                if argmax != 0 || argmin < 2 {
                    return Err(format!(
                        "{model} base {base} (equal amplitudes: {equal}): steps 2-5 give {v:?}"
                    ));
                }
            }
            let grid = AlphaGrid::new(1.0, 2.3, 0.01).unwrap();
            let family =
                curve_family(&spectrum, &bases, &grid, model).map_err(|e| e.to_string())?;
            let at = family[0]
                .alpha
                .iter()
                .position(|a| (a - 1.22).abs() < 1e-9)
                .ok_or("1.22 not on grid")?;
            let v: Vec<f64> = family.iter().map(|c| c.normalized[at]).collect();
            if !(v[0] >= v[1] && v[1] >= v[2]) {
                return Err(format!("{model}: D(1.22) over bases {v:?} increases"));
            }
            if !equal {
                notes.push(format!(
                    "{model} D(1.22) {:.3}>{:.3}>{:.3}",
                    v[0], v[1], v[2]
                ));
            }
        }
    }
    Ok(format!(
        "step 2 loudest, 4-5 quietest for all bases and models; {}",
        notes.join("; ")
    ))
}

type Criterion = fn() -> Outcome;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 11] = [
        ("bar-curve minima", bar_minima),
        ("bar+resonator minima", resonator_minima),
        ("model equivalence", model_equivalence),
        ("oracle equivalence", oracle_equivalence),
        ("pair-roughness stationary point", stationary_point),
        ("isotonic-table reproduction", isotonic_tables),
        ("cents round-trip", cents_round_trip),
        ("interval statistics", interval_statistics),
        ("scheme counts", scheme_counts),
        ("ingestion round-trip", ingestion_round_trip),
        ("transposition property", transposition),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
