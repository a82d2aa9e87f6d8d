//! Sweep planning for synchronized wavelength-swept coherent links.
//!
//! A transmitter and an injection-locked local oscillator sweep their optical
//! frequency with the same periodic waveform. Light reflected at a Fresnel
//! interface returns with a round-trip delay, and therefore at a different
//! point of the sweep, so its beat with the local oscillator lands at a
//! displaced frequency. This crate computes that displacement, the fraction
//! of a sweep period during which the reflection still falls inside the
//! receiver band, and the sweep frequencies that keep this fraction low for
//! every reflection of a distribution network.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;

pub mod error;
pub mod interval;
pub mod overlap;
pub mod planner;
pub mod waveform;

pub use error::{Error, Result};
pub use interval::Interval;
pub use overlap::{FrequencyScan, OverlapResult, OverlapSpec, ReflectionPoint, SPEED_OF_LIGHT};
pub use planner::{OdnProfile, OverlapMap, PlanStatus, ReflectionPlan, SecondAxis, SweepPlan};
pub use waveform::SweepWaveform;
