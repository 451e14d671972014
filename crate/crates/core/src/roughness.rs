//! Roughness of a pair of pure tones.
//!
//! All three models share the Plomp–Levelt style bracket
//! `exp(-b1·s·Δf) − exp(-b2·s·Δf)` and differ only in the amplitude weight:
//!
//! * [`Model::Sethares1993`]: `a_max · a_min`
//! * [`Model::Vassilakis2001`]: `0.5 · (a_max·a_min)^0.1 · (2·a_min / (a_min + a_max))^3.11`
//! * [`Model::Sethares2005`]: `ℓ_min`, the smaller Stevens-law loudness `a^0.60`
//!
//! The bandwidth parameter `s` is evaluated at the lower of the two
//! frequencies, so every model is symmetric in its arguments.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// One sinusoidal component: frequency in Hz and a linear, normalized amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneComponent {
    frequency: f64,
    amplitude: f64,
}

impl ToneComponent {
    pub fn new(frequency: f64, amplitude: f64) -> Result<Self> {
        if !frequency.is_finite() || frequency <= 0.0 {
            return Err(Error::invalid(format!(
                "tone frequency must be finite and positive, got {frequency}"
            )));
        }
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(Error::invalid(format!(
                "tone amplitude must be finite and non-negative, got {amplitude}"
            )));
        }
        Ok(ToneComponent {
            frequency,
            amplitude,
        })
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }
}

/// Constants of the roughness bracket and of the bandwidth parameter
/// `s = s_num / (s_c1 · f_min + s_c2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoughnessConstants {
    pub b1: f64,
    pub b2: f64,
    pub s_num: f64,
    pub s_c1: f64,
    pub s_c2: f64,
}

impl Default for RoughnessConstants {
    fn default() -> Self {
        RoughnessConstants {
            b1: 3.5,
            b2: 5.75,
            s_num: 0.24,
            s_c1: 0.0207,
            s_c2: 18.96,
        }
    }
}

impl RoughnessConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.b1 > 0.0 && self.b2 > self.b1) {
            return Err(Error::invalid(format!(
                "roughness constants need b2 > b1 > 0, got b1 = {}, b2 = {}",
                self.b1, self.b2
            )));
        }
        if !(self.s_num > 0.0 && self.s_c1 >= 0.0 && self.s_c2 > 0.0) {
            return Err(Error::invalid("bandwidth constants must be positive"));
        }
        Ok(())
    }

    /// Bandwidth scaling `s` at the lower frequency of a pair.
    #[inline]
    pub fn bandwidth(&self, f_min: f64) -> f64 {
        self.s_num / (self.s_c1 * f_min + self.s_c2)
    }

    /// `exp(-b1·x) − exp(-b2·x)` with `x = s(f_min)·|f2 − f1|`.
    #[inline]
    pub fn bracket(&self, f1: f64, f2: f64) -> f64 {
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        let x = self.bandwidth(lo) * (hi - lo);
        (-self.b1 * x).exp() - (-self.b2 * x).exp()
    }

    /// The scaled frequency difference `x* = ln(b2/b1)/(b2 − b1)` at which
    /// the bracket peaks.
    pub fn stationary_point(&self) -> f64 {
        (self.b2 / self.b1).ln() / (self.b2 - self.b1)
    }
}

/// Which pair-roughness model to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Model {
    #[default]
    Sethares1993,
    Vassilakis2001,
    Sethares2005,
}

impl Model {
    pub const ALL: [Model; 3] = [
        Model::Sethares1993,
        Model::Vassilakis2001,
        Model::Sethares2005,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Model::Sethares1993 => "sethares1993",
            Model::Vassilakis2001 => "vassilakis2001",
            Model::Sethares2005 => "sethares2005",
        }
    }

    /// Amplitude weight of a pair. `a1`, `a2` are linear normalized amplitudes.
    #[inline]
    pub fn weight(&self, a1: f64, a2: f64) -> f64 {
        let (a_min, a_max) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        match self {
            Model::Sethares1993 => a_max * a_min,
            Model::Vassilakis2001 => {
                let sum = a_min + a_max;
                if sum <= 0.0 {
                    return 0.0;
                }
                0.5 * (a_max * a_min).powf(0.1) * (2.0 * a_min / sum).powf(3.11)
            }
            Model::Sethares2005 => stevens_loudness(a_min),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sethares1993" | "sethares93" => Ok(Model::Sethares1993),
            "vassilakis2001" | "vassilakis" => Ok(Model::Vassilakis2001),
            "sethares2005" | "sethares05" => Ok(Model::Sethares2005),
            other => Err(Error::invalid(format!("unknown roughness model '{other}'"))),
        }
    }
}

/// Roughness of two pure tones under `model` with the default constants.
pub fn pair_dissonance(t1: ToneComponent, t2: ToneComponent, model: Model) -> f64 {
    pair_dissonance_with(t1, t2, model, &RoughnessConstants::default())
}

pub fn pair_dissonance_with(
    t1: ToneComponent,
    t2: ToneComponent,
    model: Model,
    constants: &RoughnessConstants,
) -> f64 {
    pair_kernel(
        t1.frequency,
        t1.amplitude,
        t2.frequency,
        t2.amplitude,
        model,
        constants,
    )
}

/// Unchecked pair roughness for hot loops; inputs must already be valid.
#[inline]
pub(crate) fn pair_kernel(
    f1: f64,
    a1: f64,
    f2: f64,
    a2: f64,
    model: Model,
    constants: &RoughnessConstants,
) -> f64 {
    if f1 == f2 {
        return 0.0;
    }
    let w = model.weight(a1, a2);
    if w == 0.0 {
        return 0.0;
    }
    w * constants.bracket(f1, f2)
}

/// Reference pressure and Stevens exponent of the loudness approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoudnessParams {
    /// Pa.
    pub reference_pressure: f64,
    pub stevens_exponent: f64,
}

impl Default for LoudnessParams {
    fn default() -> Self {
        LoudnessParams {
            reference_pressure: 20e-6,
            stevens_exponent: 0.60,
        }
    }
}

impl LoudnessParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.reference_pressure > 0.0) {
            return Err(Error::invalid("reference pressure must be positive"));
        }
        if !(self.stevens_exponent > 0.0 && self.stevens_exponent <= 1.0) {
            return Err(Error::invalid("Stevens exponent must lie in (0, 1]"));
        }
        Ok(())
    }
}

const STEVENS_EXPONENT: f64 = 0.60;

#[inline]
fn stevens_loudness(a: f64) -> f64 {
    if a <= 0.0 {
        0.0
    } else {
        a.powf(STEVENS_EXPONENT)
    }
}

/// Loudness relative to the loudest partial, `ℓ/ℓ_max = a_norm^0.60`.
pub fn loudness_normalized(amplitude_norm: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&amplitude_norm) {
        return Err(Error::invalid(format!(
            "normalized amplitude must lie in [0, 1], got {amplitude_norm}"
        )));
    }
    Ok(stevens_loudness(amplitude_norm))
}

/// Sound pressure level in dB of a sinusoid with peak pressure `amplitude` (Pa).
pub fn sound_pressure_level(amplitude: f64, params: &LoudnessParams) -> Result<f64> {
    if !amplitude.is_finite() || amplitude <= 0.0 {
        return Err(Error::invalid(format!(
            "amplitude must be finite and positive, got {amplitude}"
        )));
    }
    params.validate()?;
    let effective = amplitude / std::f64::consts::SQRT_2;
    Ok(20.0 * (effective / params.reference_pressure).log10())
}

/// Loudness in sones, `(1/16)·2^(SPL/10)`.
pub fn loudness_sones(amplitude: f64) -> Result<f64> {
    loudness_sones_with(amplitude, &LoudnessParams::default())
}

pub fn loudness_sones_with(amplitude: f64, params: &LoudnessParams) -> Result<f64> {
    let spl = sound_pressure_level(amplitude, params)?;
    Ok(2f64.powf(spl / 10.0) / 16.0)
}
