//! Sensory-dissonance analysis for bar-and-resonator idiophones.
//!
//! The crate covers the whole chain from pure-tone roughness models up to
//! dissonance curves of complex timbres, isotonic scale fitting of measured
//! tunings, harmonic-interval statistics of performances, combinatorics of
//! the harmonic-family schemes, and an audio-to-spectrum pipeline.
//!
//! Sweeps over α grids, curve families and the scheme search run on rayon
//! when the `parallel` feature is enabled (the default). Results do not
//! depend on evaluation order.

// `!(x > 0.0)` style checks are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod curves;
mod error;
pub mod export;
pub mod ingest;
mod par;
pub mod roughness;
pub mod schemes;
pub mod timbre;
pub mod tuning;

pub use error::{Error, Result};
pub use par::Execution;

pub use curves::{
    curve_derivative, curve_family, dissonance_at_steps, find_extrema, intrinsic_dissonance,
    sample_curve, two_tone_dissonance, AlphaGrid, DissonanceCurve, Extremum, ExtremumKind,
};
pub use roughness::{pair_dissonance, Model, ToneComponent};
pub use timbre::{Partial, Spectrum};
pub use tuning::{IsotonicScale, RatioStats, TuningRecord};
