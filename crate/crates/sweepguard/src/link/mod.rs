//! Time-domain simulation of the swept, injection-locked homodyne link.

pub mod experiment;
pub mod field;
pub mod ofdm;
pub mod scenario;
pub mod spectrum;

pub use experiment::{
    pilot_beat_spectrum, run_link_experiment, simulate, Case, CaseOutcome, LinkResult, PilotConfig, PilotResult,
    ScanAxis,
};
pub use field::{Carrier, Detection, Link, LoEmission, RxField};
pub use scenario::{LockModel, Scenario};
