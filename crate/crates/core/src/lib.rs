//! Indeterminate Hamburger moment problems: Nevanlinna functions from
//! moments, the density family `f_{t+iγ}`, and Shannon entropy, with the
//! Al-Salam–Carlitz problem in closed form.
//!
//! The numerical core is generic over [`Real`]; use the `f64` aliases for
//! speed and the [`Mp`] aliases when the Hankel matrix needs extra bits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ascarlitz;
pub mod entropy;
pub mod error;
pub mod hamburger;
pub mod qseries;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Mp, Real};

pub type QParamsF64 = ascarlitz::QParams<f64>;
pub type QParamsMp = ascarlitz::QParams<Mp>;
pub type NuDensityF64 = ascarlitz::NuDensity<f64>;
pub type NuDensityMp = ascarlitz::NuDensity<Mp>;
pub type MomentSequenceF64 = hamburger::MomentSequence<f64>;
pub type MomentSequenceMp = hamburger::MomentSequence<Mp>;
pub type JacobiRecurrenceF64 = hamburger::JacobiRecurrence<f64>;
pub type JacobiRecurrenceMp = hamburger::JacobiRecurrence<Mp>;
pub type QuadrupleF64 = hamburger::NevanlinnaQuadruple<f64>;
pub type QuadrupleMp = hamburger::NevanlinnaQuadruple<Mp>;
