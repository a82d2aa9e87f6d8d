use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::link::field::{free_running_beat, Detection, Link};
use crate::link::ofdm::{data_symbols_fitting, ofdm_demodulate_evm, ofdm_modulate, OfdmConfig, OfdmFrame, Payload};
use crate::link::scenario::Scenario;
use crate::link::spectrum::{peak_track, welch_psd, SpectrumPoint, TrackPoint};

/// Below this share of locked samples the receiver is declared unable to demodulate.
pub const MIN_LOCK_FRACTION: f64 = 0.5;
pub const SPECTRUM_NFFT: usize = 4096;
pub const TRACK_NFFT: usize = 512;

/// The four link configurations compared at every operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    NoFrStatic,
    NoFrSwept,
    FrStatic,
    FrSwept,
}

impl Case {
    pub const ALL: [Case; 4] = [Case::NoFrStatic, Case::NoFrSwept, Case::FrStatic, Case::FrSwept];

    pub fn label(&self) -> &'static str {
        match self {
            Case::NoFrStatic => "nofr_static",
            Case::NoFrSwept => "nofr_swept",
            Case::FrStatic => "fr_static",
            Case::FrSwept => "fr_swept",
        }
    }

    pub fn has_reflection(&self) -> bool {
        matches!(self, Case::FrStatic | Case::FrSwept)
    }

    pub fn is_swept(&self) -> bool {
        matches!(self, Case::NoFrSwept | Case::FrSwept)
    }

    pub fn apply(&self, sc: &Scenario) -> Scenario {
        let mut out = sc.clone();
        out.mitigation_enabled = self.is_swept();
        if !self.has_reflection() {
            out.osrr_db = f64::INFINITY;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkResult {
    pub evm_per_subcarrier: Vec<f64>,
    pub evm_avg: f64,
    /// EVM above the reflection-free static case at the same point, percentage points.
    pub evm_penalty: Option<f64>,
    pub spectrum: Vec<SpectrumPoint>,
    pub lock_fraction: f64,
}

/// Which parameter an experiment steps through.
#[derive(Debug, Clone, PartialEq)]
pub enum ScanAxis {
    Single,
    Osrr(Vec<f64>),
    /// Loss budgets, dB. The reflected power stays fixed, so the signal to
    /// reflection ratio falls one for one as the budget grows.
    Budget(Vec<f64>),
}

#[derive(Debug)]
pub struct CaseOutcome {
    pub case: Case,
    pub osrr_db: f64,
    pub budget_db: f64,
    pub lock_fraction: f64,
    pub result: Result<LinkResult>,
}

/// Samples in a record of the scenario's duration, trimmed to whole OFDM symbols.
pub fn record_len(sc: &Scenario, ofdm: &OfdmConfig) -> Result<usize> {
    let layout = ofdm.layout(sc.sample_rate)?;
    let raw = (sc.duration_periods * sc.period() * sc.sample_rate).floor() as usize;
    let n = raw / layout.symbol_len() * layout.symbol_len();
    ensure(
        n >= 2 * layout.symbol_len(),
        "duration",
        sc.duration_periods,
        "long enough for a training and a data symbol",
    )?;
    Ok(n)
}

fn detect_case(sc: &Scenario, ofdm: &OfdmConfig) -> Result<(Detection, OfdmFrame)> {
    sc.validate(Some(ofdm))?;
    let n = record_len(sc, ofdm)?;
    let n_data = data_symbols_fitting(ofdm, sc.sample_rate, n)?;
    let frame = ofdm_modulate(
        ofdm,
        sc.sample_rate,
        &Payload::Random {
            seed: sc.seed,
            n_data_symbols: n_data,
        },
    )?;
    let link = Link::prepare(sc, n)?;
    let det = link.run(&frame.waveform, sc.carrier_fraction());
    Ok((det, frame))
}

fn evaluate(det: &Detection, frame: &OfdmFrame, fs: f64) -> Result<LinkResult> {
    let lock_fraction = det.lock_fraction();
    if lock_fraction < MIN_LOCK_FRACTION {
        return Err(Error::Demodulation(format!(
            "receiver locked for {:.1}% of the record",
            100.0 * lock_fraction
        )));
    }
    let evm = ofdm_demodulate_evm(&det.rf, frame)?;
    Ok(LinkResult {
        evm_per_subcarrier: evm.per_subcarrier,
        evm_avg: evm.average,
        evm_penalty: None,
        spectrum: welch_psd(&det.rf, fs, SPECTRUM_NFFT)?,
        lock_fraction,
    })
}

/// One end-to-end run: modulate, propagate, detect and demodulate.
pub fn simulate(sc: &Scenario, ofdm: &OfdmConfig) -> Result<LinkResult> {
    let (det, frame) = detect_case(sc, ofdm)?;
    evaluate(&det, &frame, sc.sample_rate)
}

/// Outcome labelled with the point's nominal ratio and budget, also for the
/// reflection-free cases.
fn run_case(point: &Scenario, ofdm: &OfdmConfig, case: Case) -> CaseOutcome {
    let sc = case.apply(point);
    let (lock_fraction, result) = match detect_case(&sc, ofdm) {
        Ok((det, frame)) => (det.lock_fraction(), evaluate(&det, &frame, sc.sample_rate)),
        Err(e) => (f64::NAN, Err(e)),
    };
    CaseOutcome {
        case,
        osrr_db: point.osrr_db,
        budget_db: point.loss_budget_db,
        lock_fraction,
        result,
    }
}

/// All four cases at every scan point, in scan order then [`Case::ALL`] order.
/// Failures at a point are reported in its outcome rather than aborting the scan.
pub fn run_link_experiment(sc: &Scenario, ofdm: &OfdmConfig, axis: &ScanAxis) -> Result<Vec<CaseOutcome>> {
    sc.validate(Some(ofdm))?;
    let points: Vec<Scenario> = match axis {
        ScanAxis::Single => vec![sc.clone()],
        ScanAxis::Osrr(values) => values
            .iter()
            .map(|&o| Scenario {
                osrr_db: o,
                ..sc.clone()
            })
            .collect(),
        ScanAxis::Budget(values) => values
            .iter()
            .map(|&b| Scenario {
                loss_budget_db: b,
                osrr_db: sc.osrr_db + sc.loss_budget_db - b,
                ..sc.clone()
            })
            .collect(),
    };
    let jobs: Vec<(usize, Case)> = (0..points.len())
        .flat_map(|p| Case::ALL.into_iter().map(move |c| (p, c)))
        .collect();
    let mut outcomes: Vec<CaseOutcome> = jobs
        .par_iter()
        .map(|&(p, case)| run_case(&points[p], ofdm, case))
        .collect();
    for chunk in outcomes.chunks_mut(Case::ALL.len()) {
        let reference = match &chunk[0].result {
            Ok(r) => Some(r.evm_avg),
            Err(_) => None,
        };
        for o in chunk.iter_mut() {
            if let (Ok(r), Some(base)) = (&mut o.result, reference) {
                r.evm_penalty = Some(r.evm_avg - base);
            }
        }
    }
    Ok(outcomes)
}

/// Single-tone probe used to look at the sweep directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotConfig {
    pub freq_hz: f64,
    /// Pilot power over residual carrier power.
    pub pilot_to_carrier_db: f64,
}

impl Default for PilotConfig {
    fn default() -> Self {
        Self {
            freq_hz: 62.5e6,
            pilot_to_carrier_db: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotResult {
    pub spectrum: Vec<SpectrumPoint>,
    pub track: Vec<TrackPoint>,
    pub lock_fraction: f64,
}

/// Detected spectrum and peak track of a pilot tone. With `locked` the pilot
/// goes through the injection-locked receiver; otherwise it is beaten against
/// a stable unswept reference, exposing the transmitter sweep.
pub fn pilot_beat_spectrum(sc: &Scenario, pilot: &PilotConfig, locked: bool) -> Result<PilotResult> {
    sc.validate(None)?;
    let fs = sc.sample_rate;
    ensure(
        pilot.freq_hz > 0.0 && pilot.freq_hz + sc.sweep.delta_f() < fs / 2.0,
        "pilot frequency",
        pilot.freq_hz,
        "> 0 Hz with the swept pilot below Nyquist",
    )?;
    ensure(
        pilot.pilot_to_carrier_db.is_finite(),
        "pilot_to_carrier",
        pilot.pilot_to_carrier_db,
        "finite dB",
    )?;
    let n = (sc.duration_periods * sc.period() * fs).floor() as usize;
    ensure(
        n >= SPECTRUM_NFFT,
        "duration",
        sc.duration_periods,
        "at least one spectrum frame",
    )?;
    let tone: Vec<Complex64> = (0..n)
        .map(|i| {
            let cycles = pilot.freq_hz * i as f64 / fs;
            Complex64::cis(std::f64::consts::TAU * (cycles - cycles.floor()))
        })
        .collect();
    let carrier_fraction = 1.0 / (1.0 + 10f64.powf(pilot.pilot_to_carrier_db / 10.0));
    let (rf, lock_fraction) = if locked {
        let det = Link::prepare(sc, n)?.run(&tone, carrier_fraction);
        let lf = det.lock_fraction();
        (det.rf, lf)
    } else {
        let sc = Scenario {
            carrier_to_signal_db: -pilot.pilot_to_carrier_db,
            ..sc.clone()
        };
        (free_running_beat(&sc, &tone, n)?, f64::NAN)
    };
    Ok(PilotResult {
        spectrum: welch_psd(&rf, fs, SPECTRUM_NFFT)?,
        track: peak_track(&rf, fs, TRACK_NFFT)?,
        lock_fraction,
    })
}
