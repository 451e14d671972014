//! Dissonance of complex tones and dissonance curves over the ratio α of
//! two fundamentals.
//!
//! The two-tone dissonance of a timbre at ratio α is
//! `D(α) = D_F + D_αF + Σ_i Σ_j d(f_i, α·f_j)`: the intrinsic dissonance of
//! each copy plus every cross pair between the copies. Cross pairs that land
//! on the same frequency contribute zero; nothing is deduplicated.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::export::fmt_num;
use crate::par::{self, Execution};
use crate::roughness::{pair_kernel, Model, RoughnessConstants};
use crate::timbre::Spectrum;
use crate::tuning::IsotonicScale;
use crate::{Error, Result};

/// Default minimum prominence (normalized units) for reported extrema.
/// Small enough to keep the shallow sevenths-region minimum near 1.96 of
/// the bar+resonator timbre (prominence about 0.006), far above grid noise.
pub const DEFAULT_PROMINENCE: f64 = 0.005;

/// Fraction of an extremum's prominence at which its width is measured.
pub const WIDTH_LEVEL: f64 = 0.1;

fn check_base(base_frequency: f64) -> Result<()> {
    if !base_frequency.is_finite() || base_frequency <= 0.0 {
        return Err(Error::invalid(format!(
            "base frequency must be finite and positive, got {base_frequency}"
        )));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha < 1.0 {
        return Err(Error::invalid(format!(
            "alpha must be finite and >= 1, got {alpha}"
        )));
    }
    Ok(())
}

fn intrinsic_sum(
    partials: &[(f64, f64)],
    scale: f64,
    model: Model,
    constants: &RoughnessConstants,
) -> f64 {
    let mut total = 0.0;
    for (i, &(fi, ai)) in partials.iter().enumerate() {
        for &(fj, aj) in &partials[i + 1..] {
            total += pair_kernel(scale * fi, ai, scale * fj, aj, model, constants);
        }
    }
    total
}

/// Evaluates `D(α)` for one timbre at one base frequency.
#[derive(Debug, Clone)]
pub struct TwoToneEvaluator {
    partials: Vec<(f64, f64)>,
    model: Model,
    constants: RoughnessConstants,
    lower_intrinsic: f64,
}

impl TwoToneEvaluator {
    pub fn new(spectrum: &Spectrum, base_frequency: f64, model: Model) -> Result<Self> {
        Self::with_constants(
            spectrum,
            base_frequency,
            model,
            RoughnessConstants::default(),
        )
    }

    pub fn with_constants(
        spectrum: &Spectrum,
        base_frequency: f64,
        model: Model,
        constants: RoughnessConstants,
    ) -> Result<Self> {
        check_base(base_frequency)?;
        constants.validate()?;
        let partials = spectrum.at(base_frequency);
        let lower_intrinsic = intrinsic_sum(&partials, 1.0, model, &constants);
        Ok(TwoToneEvaluator {
            partials,
            model,
            constants,
            lower_intrinsic,
        })
    }

    /// Unchecked evaluation; `alpha` must be finite and `>= 1`.
    pub fn eval(&self, alpha: f64) -> f64 {
        let upper = intrinsic_sum(&self.partials, alpha, self.model, &self.constants);
        let mut cross = 0.0;
        for &(fi, ai) in &self.partials {
            for &(fj, aj) in &self.partials {
                cross += pair_kernel(fi, ai, alpha * fj, aj, self.model, &self.constants);
            }
        }
        self.lower_intrinsic + upper + cross
    }

    pub fn try_eval(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        Ok(self.eval(alpha))
    }
}

/// Total dissonance of one complex tone: the sum over all unordered pairs of partials.
pub fn intrinsic_dissonance(spectrum: &Spectrum, base_frequency: f64, model: Model) -> Result<f64> {
    check_base(base_frequency)?;
    if spectrum.is_empty() {
        return Err(Error::invalid("empty spectrum"));
    }
    let constants = RoughnessConstants::default();
    Ok(intrinsic_sum(
        &spectrum.at(base_frequency),
        1.0,
        model,
        &constants,
    ))
}

/// Dissonance of two copies of `spectrum` with fundamentals `base` and `alpha·base`.
pub fn two_tone_dissonance(
    spectrum: &Spectrum,
    base_frequency: f64,
    alpha: f64,
    model: Model,
) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(TwoToneEvaluator::new(spectrum, base_frequency, model)?.eval(alpha))
}

/// Uniform α grid `lo, lo + step, …` up to and including `hi` (when on-grid).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaGrid {
    lo: f64,
    hi: f64,
    step: f64,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        AlphaGrid {
            lo: 1.0,
            hi: 2.3,
            step: 0.001,
        }
    }
}

impl AlphaGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
            return Err(Error::invalid("alpha grid bounds must be finite"));
        }
        if lo < 1.0 || !(hi > lo) {
            return Err(Error::invalid(format!(
                "alpha range must satisfy 1 <= lo < hi, got {lo}:{hi}"
            )));
        }
        if !(step > 0.0) {
            return Err(Error::invalid(format!(
                "alpha step must be positive, got {step}"
            )));
        }
        let grid = AlphaGrid { lo, hi, step };
        if grid.len() < 2 {
            return Err(Error::invalid("alpha step is larger than the range"));
        }
        Ok(grid)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The i-th grid point, computed without accumulating rounding error.
    pub fn point(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Same range with half the step.
    pub fn refined(&self) -> AlphaGrid {
        AlphaGrid {
            step: self.step / 2.0,
            ..*self
        }
    }
}

impl FromStr for AlphaGrid {
    type Err = Error;

    /// Parses `lo:hi:step`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::invalid(format!("expected lo:hi:step, got '{s}'")));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad number '{p}' in alpha grid")))
        };
        AlphaGrid::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }
}

/// Sampled dissonance curve with both raw and normalized values.
#[derive(Debug, Clone, PartialEq)]
pub struct DissonanceCurve {
    pub base_frequency: f64,
    pub model: Model,
    pub alpha: Vec<f64>,
    pub values: Vec<f64>,
    pub normalized: Vec<f64>,
    /// Divisor that maps `values` to `normalized`.
    pub normalizer: f64,
}

impl DissonanceCurve {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn max_raw(&self) -> f64 {
        self.values.iter().copied().fold(f64::MIN, f64::max)
    }

    /// Rescales `normalized` against an external maximum.
    pub fn renormalize(&mut self, normalizer: f64) {
        self.normalizer = normalizer;
        self.normalized = self.values.iter().map(|v| v / normalizer).collect();
    }

    /// Builds a curve from raw samples, normalizing by their maximum.
    pub fn from_samples(
        base_frequency: f64,
        model: Model,
        alpha: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if alpha.len() != values.len() {
            return Err(Error::invalid("alpha and value columns differ in length"));
        }
        if alpha.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("alpha samples must be strictly increasing"));
        }
        let max = values.iter().copied().fold(f64::MIN, f64::max);
        if !(max > 0.0) || !max.is_finite() {
            return Err(Error::invalid(
                "curve has no positive finite sample to normalize by",
            ));
        }
        let mut curve = DissonanceCurve {
            base_frequency,
            model,
            alpha,
            values,
            normalized: Vec::new(),
            normalizer: max,
        };
        curve.renormalize(max);
        Ok(curve)
    }

    /// `alpha,dissonance` CSV of the normalized values.
    pub fn to_csv(&self, round: Option<usize>) -> String {
        let mut out = String::from("alpha,dissonance\n");
        for (a, d) in self.alpha.iter().zip(&self.normalized) {
            let _ = writeln!(out, "{},{}", fmt_num(*a, round), fmt_num(*d, round));
        }
        out
    }
}

/// Samples `D(α)` on `grid` and normalizes by the curve's own maximum.
pub fn sample_curve(
    spectrum: &Spectrum,
    base_frequency: f64,
    grid: &AlphaGrid,
    model: Model,
) -> Result<DissonanceCurve> {
    sample_curve_with(spectrum, base_frequency, grid, model, Execution::default())
}

pub fn sample_curve_with(
    spectrum: &Spectrum,
    base_frequency: f64,
    grid: &AlphaGrid,
    model: Model,
    exec: Execution,
) -> Result<DissonanceCurve> {
    let evaluator = TwoToneEvaluator::new(spectrum, base_frequency, model)?;
    let alpha = grid.points();
    let values = par::map_slice(exec, &alpha, |&a| evaluator.eval(a));
    DissonanceCurve::from_samples(base_frequency, model, alpha, values)
}

/// One curve per base frequency, all normalized by the family-wide maximum.
pub fn curve_family(
    spectrum: &Spectrum,
    base_frequencies: &[f64],
    grid: &AlphaGrid,
    model: Model,
) -> Result<Vec<DissonanceCurve>> {
    curve_family_with(
        spectrum,
        base_frequencies,
        grid,
        model,
        Execution::default(),
    )
}

pub fn curve_family_with(
    spectrum: &Spectrum,
    base_frequencies: &[f64],
    grid: &AlphaGrid,
    model: Model,
    exec: Execution,
) -> Result<Vec<DissonanceCurve>> {
    if base_frequencies.is_empty() {
        return Err(Error::invalid(
            "curve family needs at least one base frequency",
        ));
    }
    for &b in base_frequencies {
        check_base(b)?;
    }
    // Members are sampled one after another; each sweep is itself parallel.
    let mut curves = base_frequencies
        .iter()
        .map(|&b| sample_curve_with(spectrum, b, grid, model, exec))
        .collect::<Result<Vec<_>>>()?;
    let family_max = curves
        .iter()
        .map(DissonanceCurve::max_raw)
        .fold(f64::MIN, f64::max);
    for c in &mut curves {
        c.renormalize(family_max);
    }
    Ok(curves)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

impl ExtremumKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExtremumKind::Minimum => "minimum",
            ExtremumKind::Maximum => "maximum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub kind: ExtremumKind,
    /// Refined location.
    pub alpha: f64,
    /// Refined normalized value.
    pub value: f64,
    /// α-span where the curve stays within 10% of the prominence of the extremum value.
    pub width: f64,
    /// Topographic prominence in normalized units.
    pub prominence: f64,
    /// Grid index of the (plateau-start) sample.
    pub index: usize,
}

/// Local extrema of the normalized curve with prominence at least `min_prominence`,
/// ordered by α.
pub fn find_extrema(curve: &DissonanceCurve, min_prominence: f64) -> Vec<Extremum> {
    let mut out = Vec::new();
    if curve.len() < 3 {
        return out;
    }
    let up: Vec<f64> = curve.normalized.clone();
    let down: Vec<f64> = curve.normalized.iter().map(|v| -v).collect();
    for (kind, ys) in [(ExtremumKind::Minimum, &up), (ExtremumKind::Maximum, &down)] {
        for (lo, hi) in valley_plateaus(ys) {
            let prominence = valley_prominence(ys, lo, hi);
            if prominence < min_prominence {
                continue;
            }
            let (alpha, y) = refine(&curve.alpha, ys, lo, hi);
            let width = valley_width(&curve.alpha, ys, lo, hi, ys[lo] + WIDTH_LEVEL * prominence);
            out.push(Extremum {
                kind,
                alpha,
                value: if kind == ExtremumKind::Minimum { y } else { -y },
                width,
                prominence,
                index: lo,
            });
        }
    }
    out.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    out
}

/// Interior runs `lo..=hi` of equal samples bordered by strictly larger samples.
fn valley_plateaus(ys: &[f64]) -> Vec<(usize, usize)> {
    let n = ys.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if ys[i] < ys[i - 1] {
            let mut j = i;
            while j + 1 < n && ys[j + 1] == ys[i] {
                j += 1;
            }
            if j + 1 < n && ys[j + 1] > ys[i] {
                out.push((i, j));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Depth of the valley below the lower of its two bounding saddles. Each
/// side is scanned until a strictly lower sample or the curve's end.
fn valley_prominence(ys: &[f64], lo: usize, hi: usize) -> f64 {
    let v = ys[lo];
    let mut left = v;
    for &y in ys[..lo].iter().rev() {
        if y < v {
            break;
        }
        left = left.max(y);
    }
    let mut right = v;
    for &y in &ys[hi + 1..] {
        if y < v {
            break;
        }
        right = right.max(y);
    }
    left.min(right) - v
}

fn refine(alpha: &[f64], ys: &[f64], lo: usize, hi: usize) -> (f64, f64) {
    if lo != hi {
        return ((alpha[lo] + alpha[hi]) / 2.0, ys[lo]);
    }
    let i = lo;
    let (y0, y1, y2) = (ys[i - 1], ys[i], ys[i + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    if denom == 0.0 {
        return (alpha[i], y1);
    }
    let p = 0.5 * (y0 - y2) / denom;
    let h = if p < 0.0 {
        alpha[i] - alpha[i - 1]
    } else {
        alpha[i + 1] - alpha[i]
    };
    (alpha[i] + p * h, y1 - 0.25 * (y0 - y2) * p)
}

fn valley_width(alpha: &[f64], ys: &[f64], lo: usize, hi: usize, level: f64) -> f64 {
    let cross = |a: usize, b: usize| {
        // ys[a] < level <= ys[b]
        let t = (level - ys[a]) / (ys[b] - ys[a]);
        alpha[a] + t * (alpha[b] - alpha[a])
    };
    let mut left = alpha[0];
    for k in (0..lo).rev() {
        if ys[k] >= level {
            left = cross(k + 1, k);
            break;
        }
    }
    let mut right = alpha[alpha.len() - 1];
    for (k, &y) in ys.iter().enumerate().skip(hi + 1) {
        if y >= level {
            right = cross(k - 1, k);
            break;
        }
    }
    right - left
}

/// Extrema as `kind,alpha,value,width,prominence` CSV.
pub fn extrema_csv(extrema: &[Extremum], round: Option<usize>) -> String {
    let mut out = String::from("kind,alpha,value,width,prominence\n");
    for e in extrema {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            e.kind.name(),
            fmt_num(e.alpha, round),
            fmt_num(e.value, round),
            fmt_num(e.width, round),
            fmt_num(e.prominence, round)
        );
    }
    out
}

/// `dD/dα` of the normalized curve: central differences inside, one-sided at the ends.
pub fn curve_derivative(curve: &DissonanceCurve) -> Vec<(f64, f64)> {
    let (a, y) = (&curve.alpha, &curve.normalized);
    let n = a.len();
    if n < 2 {
        return Vec::new();
    }
    (0..n)
        .map(|i| {
            let (l, r) = match i {
                0 => (0, 1),
                _ if i == n - 1 => (n - 2, n - 1),
                _ => (i - 1, i + 1),
            };
            (a[i], (y[r] - y[l]) / (a[r] - a[l]))
        })
        .collect()
}

pub fn derivative_csv(derivative: &[(f64, f64)], round: Option<usize>) -> String {
    let mut out = String::from("alpha,derivative\n");
    for (a, d) in derivative {
        let _ = writeln!(out, "{},{}", fmt_num(*a, round), fmt_num(*d, round));
    }
    out
}

/// Dissonance at the interval spanned by `step` bars of an isotonic scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDissonance {
    pub step: u32,
    pub alpha: f64,
    pub raw: f64,
    pub normalized: f64,
}

/// Evaluates `D(r_p^(s/p))` for each step `s`, normalized by the maximum of
/// the same-base curve on the default α grid.
pub fn dissonance_at_steps(
    spectrum: &Spectrum,
    base_frequency: f64,
    scale: &IsotonicScale,
    steps: &[u32],
    model: Model,
) -> Result<Vec<StepDissonance>> {
    let reference = sample_curve(spectrum, base_frequency, &AlphaGrid::default(), model)?;
    dissonance_at_steps_normalized_by(
        spectrum,
        base_frequency,
        scale,
        steps,
        model,
        reference.normalizer,
    )
}

pub fn dissonance_at_steps_normalized_by(
    spectrum: &Spectrum,
    base_frequency: f64,
    scale: &IsotonicScale,
    steps: &[u32],
    model: Model,
    normalizer: f64,
) -> Result<Vec<StepDissonance>> {
    if !(normalizer > 0.0) {
        return Err(Error::invalid("normalizer must be positive"));
    }
    let evaluator = TwoToneEvaluator::new(spectrum, base_frequency, model)?;
    steps
        .iter()
        .map(|&step| {
            if step == 0 {
                return Err(Error::invalid("steps must be >= 1"));
            }
            let alpha = scale.ratio_at(step);
            let raw = evaluator.try_eval(alpha)?;
            Ok(StepDissonance {
                step,
                alpha,
                raw,
                normalized: raw / normalizer,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roughness::{pair_dissonance, ToneComponent};
    use crate::timbre::{
        bar_spectrum, experimental_spectrum, harmonic_spectrum, AmplitudeModel, Partial,
    };
    use approx::assert_relative_eq;

    /// Plain transcription of the pair formula, kept apart from the crate's kernel.
    fn oracle_pair(f1: f64, f2: f64, a1: f64, a2: f64) -> f64 {
        let (fmin, fmax) = (f1.min(f2), f1.max(f2));
        let s = 0.24 / (0.0207 * fmin + 18.96);
        a1.min(a2)
            * a1.max(a2)
            * ((-3.5 * s * (fmax - fmin)).exp() - (-5.75 * s * (fmax - fmin)).exp())
    }

    fn synthetic(alpha: Vec<f64>, values: Vec<f64>) -> DissonanceCurve {
        DissonanceCurve::from_samples(300.0, Model::Sethares1993, alpha, values).unwrap()
    }

    #[test]
    fn single_partial_has_no_intrinsic_dissonance() {
        let s = harmonic_spectrum(1, AmplitudeModel::Equal).unwrap();
        for m in Model::ALL {
            assert_eq!(intrinsic_dissonance(&s, 440.0, m).unwrap(), 0.0);
        }
    }

    #[test]
    fn two_partials_reduce_to_one_pair() {
        let s = bar_spectrum(1, AmplitudeModel::Equal).unwrap();
        let d = intrinsic_dissonance(&s, 300.0, Model::Sethares1993).unwrap();
        let t1 = ToneComponent::new(300.0, 1.0).unwrap();
        let t2 = ToneComponent::new(300.0 * 2.758, 1.0).unwrap();
        assert_relative_eq!(
            d,
            pair_dissonance(t1, t2, Model::Sethares1993),
            max_relative = 1e-15
        );
    }

    #[test]
    fn six_harmonics_match_nested_loop() {
        let s = harmonic_spectrum(6, AmplitudeModel::Equal).unwrap();
        let mut expected = 0.0;
        for i in 1..=6 {
            for j in (i + 1)..=6 {
                expected += oracle_pair(300.0 * i as f64, 300.0 * j as f64, 1.0, 1.0);
            }
        }
        let d = intrinsic_dissonance(&s, 300.0, Model::Sethares1993).unwrap();
        assert_relative_eq!(d, expected, max_relative = 1e-13);
    }

    #[test]
    fn single_partial_two_tone_is_pair_of_fundamentals() {
        let s = harmonic_spectrum(1, AmplitudeModel::Equal).unwrap();
        for m in Model::ALL {
            let d = two_tone_dissonance(&s, 250.0, 1.3, m).unwrap();
            let p = pair_dissonance(
                ToneComponent::new(250.0, 1.0).unwrap(),
                ToneComponent::new(325.0, 1.0).unwrap(),
                m,
            );
            assert_relative_eq!(d, p, max_relative = 1e-15);
        }
    }

    #[test]
    fn two_tone_matches_three_term_oracle() {
        let s = experimental_spectrum(false);
        let base = 300.0;
        let alpha = 1.5;
        let parts: Vec<(f64, f64)> = s.at(base);
        let mut d_f = 0.0;
        let mut d_af = 0.0;
        let mut cross = 0.0;
        for &(fi, ai) in &parts {
            for &(fj, aj) in &parts {
                d_f += 0.5 * oracle_pair(fi, fj, ai, aj);
                d_af += 0.5 * oracle_pair(alpha * fi, alpha * fj, ai, aj);
                cross += oracle_pair(fi, alpha * fj, ai, aj);
            }
        }
        let got = two_tone_dissonance(&s, base, alpha, Model::Sethares1993).unwrap();
        assert_relative_eq!(got, d_f + d_af + cross, max_relative = 1e-12);
    }

    #[test]
    fn two_tone_equals_merged_intrinsic() {
        let s = bar_spectrum(3, AmplitudeModel::Exponential).unwrap();
        let alpha = 1.37;
        // Intrinsic dissonance of the merged 2m-partial set, computed pairwise.
        let mut merged: Vec<(f64, f64)> = s.at(200.0);
        merged.extend(s.at(200.0 * alpha));
        let mut expected = 0.0;
        for i in 0..merged.len() {
            for j in i + 1..merged.len() {
                expected += oracle_pair(merged[i].0, merged[j].0, merged[i].1, merged[j].1);
            }
        }
        let got = two_tone_dissonance(&s, 200.0, alpha, Model::Sethares1993).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-12);
    }

    #[test]
    fn input_validation() {
        let s = experimental_spectrum(false);
        assert!(two_tone_dissonance(&s, 300.0, 0.99, Model::Sethares1993).is_err());
        assert!(two_tone_dissonance(&s, 0.0, 1.5, Model::Sethares1993).is_err());
        assert!(two_tone_dissonance(&s, 300.0, f64::NAN, Model::Sethares1993).is_err());
        assert!(intrinsic_dissonance(&s, -1.0, Model::Sethares1993).is_err());
        assert!(AlphaGrid::new(0.9, 2.0, 0.01).is_err());
        assert!(AlphaGrid::new(1.5, 1.5, 0.01).is_err());
        assert!(AlphaGrid::new(1.0, 2.0, 0.0).is_err());
        assert!(AlphaGrid::new(1.0, 1.001, 0.01).is_err());
        assert!(curve_family(&s, &[], &AlphaGrid::default(), Model::Sethares1993).is_err());
        assert!(curve_family(
            &s,
            &[300.0, 0.0],
            &AlphaGrid::default(),
            Model::Sethares1993
        )
        .is_err());
    }

    #[test]
    fn grid_parsing_and_points() {
        let g: AlphaGrid = "1.0:1.6:0.001".parse().unwrap();
        assert_eq!(g.len(), 601);
        assert_eq!(g.point(0), 1.0);
        assert_relative_eq!(g.point(600), 1.6, max_relative = 1e-15);
        assert_eq!(AlphaGrid::default().len(), 1301);
        assert!("1.0:1.6".parse::<AlphaGrid>().is_err());
        assert!("a:b:c".parse::<AlphaGrid>().is_err());
    }

    #[test]
    fn octave_is_a_local_minimum_for_harmonic_timbre() {
        let s = harmonic_spectrum(6, AmplitudeModel::Equal).unwrap();
        let curve = sample_curve(&s, 300.0, &AlphaGrid::default(), Model::Sethares1993).unwrap();
        let minima: Vec<f64> = find_extrema(&curve, DEFAULT_PROMINENCE)
            .into_iter()
            .filter(|e| e.kind == ExtremumKind::Minimum)
            .map(|e| e.alpha)
            .collect();
        for just in [2.0, 1.5, 4.0 / 3.0, 5.0 / 3.0, 1.25, 1.2] {
            assert!(
                minima.iter().any(|m| (m - just).abs() < 0.01),
                "no minimum near {just}: {minima:?}"
            );
        }
    }

    #[test]
    fn normalized_curve_peaks_at_one() {
        let s = bar_spectrum(5, AmplitudeModel::Equal).unwrap();
        let curve = sample_curve(
            &s,
            300.0,
            &"1.0:1.6:0.001".parse().unwrap(),
            Model::Vassilakis2001,
        )
        .unwrap();
        let max = curve.normalized.iter().copied().fold(f64::MIN, f64::max);
        assert_eq!(max, 1.0);
        assert!(curve.normalized.iter().all(|&v| v >= 0.0));
        assert_eq!(curve.values.len(), curve.alpha.len());
    }

    #[test]
    fn monotone_curve_has_no_extrema() {
        let alpha: Vec<f64> = (0..50).map(|i| 1.0 + i as f64 * 0.01).collect();
        let values: Vec<f64> = (0..50).map(|i| 100.0 - i as f64).collect();
        assert!(find_extrema(&synthetic(alpha, values), 0.0).is_empty());
    }

    #[test]
    fn v_shape_has_single_minimum_at_vertex() {
        let alpha: Vec<f64> = (0..41).map(|i| 1.0 + i as f64 * 0.01).collect();
        let values: Vec<f64> = alpha.iter().map(|a| (a - 1.2).abs() + 0.1).collect();
        let ex = find_extrema(&synthetic(alpha, values), DEFAULT_PROMINENCE);
        assert_eq!(ex.len(), 1);
        assert_eq!(ex[0].kind, ExtremumKind::Minimum);
        assert_relative_eq!(ex[0].alpha, 1.2, max_relative = 1e-12);
        assert!(ex[0].width > 0.0);
    }

    #[test]
    fn plateau_reports_midpoint() {
        let alpha: Vec<f64> = (0..7).map(|i| 1.0 + i as f64 * 0.1).collect();
        let values = vec![5.0, 3.0, 1.0, 1.0, 1.0, 3.0, 5.0];
        let ex = find_extrema(&synthetic(alpha, values), 0.0);
        assert_eq!(ex.len(), 1);
        assert_relative_eq!(ex[0].alpha, 1.3, max_relative = 1e-12);
        assert_relative_eq!(ex[0].value, 0.2, max_relative = 1e-12);
    }

    #[test]
    fn prominence_filters_ripples() {
        let alpha: Vec<f64> = (0..9).map(|i| 1.0 + i as f64 * 0.1).collect();
        // deep valley at index 2, shallow ripple at index 6
        let values = vec![10.0, 6.0, 1.0, 6.0, 8.0, 7.99, 7.97, 7.99, 10.0];
        let ex = find_extrema(&synthetic(alpha, values), DEFAULT_PROMINENCE);
        let minima: Vec<_> = ex
            .iter()
            .filter(|e| e.kind == ExtremumKind::Minimum)
            .collect();
        assert_eq!(minima.len(), 1);
        assert_eq!(minima[0].index, 2);
        assert_relative_eq!(minima[0].prominence, 0.9, max_relative = 1e-12);
    }

    #[test]
    fn derivative_of_constant_and_linear() {
        let alpha: Vec<f64> = (0..30).map(|i| 1.0 + i as f64 * 0.01).collect();
        let flat = synthetic(alpha.clone(), vec![2.0; 30]);
        assert!(curve_derivative(&flat).iter().all(|&(_, d)| d == 0.0));

        let k = 0.37;
        let values: Vec<f64> = alpha.iter().map(|a| 1.0 + k * (a - 1.0)).collect();
        let lin = synthetic(alpha, values);
        // slope of the normalized curve
        let slope = k / lin.normalizer;
        for (_, d) in curve_derivative(&lin) {
            assert!((d - slope).abs() < 1e-9, "{d} vs {slope}");
        }
    }

    #[test]
    fn derivative_matches_direct_difference() {
        let s = experimental_spectrum(false);
        let grid: AlphaGrid = "1.0:2.0:0.001".parse().unwrap();
        let curve = sample_curve(&s, 300.0, &grid, Model::Sethares2005).unwrap();
        let deriv = curve_derivative(&curve);
        let h = grid.step();
        for i in (50..curve.len() - 50).step_by(97) {
            let a = curve.alpha[i];
            let direct = (two_tone_dissonance(&s, 300.0, a + h, Model::Sethares2005).unwrap()
                - two_tone_dissonance(&s, 300.0, a - h, Model::Sethares2005).unwrap())
                / (2.0 * h)
                / curve.normalizer;
            assert!(
                (deriv[i].1 - direct).abs() <= 1e-6 * (1.0 + direct.abs()),
                "at {a}"
            );
        }
    }

    #[test]
    fn family_shares_normalization() {
        let s = experimental_spectrum(false);
        let grid: AlphaGrid = "1.0:1.5:0.01".parse().unwrap();
        let fam = curve_family(&s, &[300.0, 300.0, 450.0], &grid, Model::Sethares1993).unwrap();
        assert_eq!(fam[0], fam[1]);
        let overall = fam
            .iter()
            .flat_map(|c| c.normalized.iter().copied())
            .fold(f64::MIN, f64::max);
        assert_eq!(overall, 1.0);
        // single member equals sample_curve up to normalization
        let single = sample_curve(&s, 450.0, &grid, Model::Sethares1993).unwrap();
        assert_eq!(single.values, fam[2].values);
        let k = single.normalized[10] / fam[2].normalized[10];
        for (a, b) in single.normalized.iter().zip(&fam[2].normalized) {
            assert!((a - k * b).abs() < 1e-12);
        }
    }

    #[test]
    fn steps_on_equi_heptatonic_scale() {
        let s = experimental_spectrum(false);
        let scale = IsotonicScale::new(7, 2.0).unwrap();
        let out = dissonance_at_steps(&s, 300.0, &scale, &[1, 7], Model::Sethares1993).unwrap();
        assert_relative_eq!(out[0].alpha, 2f64.powf(1.0 / 7.0), max_relative = 1e-15);
        assert!((out[0].alpha - 1.1041).abs() < 5e-5);
        assert_relative_eq!(out[1].alpha, 2.0, max_relative = 1e-15);
        assert!(dissonance_at_steps(&s, 300.0, &scale, &[0], Model::Sethares1993).is_err());
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let s = bar_spectrum(5, AmplitudeModel::Equal).unwrap();
        let grid: AlphaGrid = "1.0:2.0:0.002".parse().unwrap();
        let a = sample_curve_with(
            &s,
            300.0,
            &grid,
            Model::Vassilakis2001,
            Execution::Sequential,
        )
        .unwrap();
        let b = sample_curve_with(&s, 300.0, &grid, Model::Vassilakis2001, Execution::Parallel)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spectrum_with_silent_partial_is_fine() {
        let s = Spectrum::new(vec![Partial::new(1.0, 1.0), Partial::new(2.0, 0.0)]).unwrap();
        let d = two_tone_dissonance(&s, 300.0, 1.1, Model::Vassilakis2001).unwrap();
        assert!(d > 0.0 && d.is_finite());
    }
}
