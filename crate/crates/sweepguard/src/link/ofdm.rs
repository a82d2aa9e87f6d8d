//! OFDM transmitter and EVM receiver.
//!
//! The modulator produces an analytic (positive-frequency only) multicarrier
//! envelope sampled at the simulation rate. Subcarriers sit on the DFT grid of
//! an `fs / spacing`-point transform, so a subcarrier maps to a single bin of
//! the detected real RF waveform. A known training symbol precedes every
//! group of `pilot_symbol_period` data symbols and feeds a one-tap equalizer.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

const TRAINING_SEED: u64 = 0x0fd1_7a1e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constellation {
    Qpsk,
    #[serde(rename = "16qam")]
    Qam16,
}

impl Constellation {
    pub fn order(&self) -> usize {
        match self {
            Constellation::Qpsk => 4,
            Constellation::Qam16 => 16,
        }
    }

    /// Gray-mapped point with unit average power.
    pub fn point(&self, index: u16) -> Complex64 {
        match self {
            Constellation::Qpsk => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let re = if index & 0b10 == 0 { -s } else { s };
                let im = if index & 0b01 == 0 { -s } else { s };
                Complex64::new(re, im)
            }
            Constellation::Qam16 => {
                let level = |bits: u16| match bits {
                    0b00 => -3.0,
                    0b01 => -1.0,
                    0b11 => 1.0,
                    _ => 3.0,
                };
                let norm = 1.0 / 10f64.sqrt();
                Complex64::new(level((index >> 2) & 0b11) * norm, level(index & 0b11) * norm)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfdmConfig {
    pub n_subcarriers: usize,
    pub bandwidth: f64,
    pub constellation: Constellation,
    pub cyclic_prefix_fraction: f64,
    /// Data symbols between two training symbols.
    pub pilot_symbol_period: usize,
    /// RF centre of the band; `None` places the lowest subcarrier one spacing above DC.
    pub center_offset: Option<f64>,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            n_subcarriers: 128,
            bandwidth: 125e6,
            constellation: Constellation::Qam16,
            cyclic_prefix_fraction: 1.0 / 16.0,
            pilot_symbol_period: 16,
            center_offset: None,
        }
    }
}

impl OfdmConfig {
    pub fn spacing(&self) -> f64 {
        self.bandwidth / self.n_subcarriers as f64
    }

    pub fn center(&self) -> f64 {
        self.center_offset.unwrap_or(0.5 * self.bandwidth + self.spacing())
    }

    /// Highest subcarrier frequency, Hz.
    pub fn top_frequency(&self) -> f64 {
        self.center() + 0.5 * self.bandwidth
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_subcarriers;
        ensure(
            n >= 2 && n.is_power_of_two(),
            "n_subcarriers",
            n as f64,
            "a power of two >= 2",
        )?;
        ensure(self.bandwidth > 0.0, "bandwidth", self.bandwidth, "> 0 Hz")?;
        ensure(
            (0.0..1.0).contains(&self.cyclic_prefix_fraction),
            "cyclic_prefix_fraction",
            self.cyclic_prefix_fraction,
            "in [0, 1)",
        )?;
        ensure(
            self.pilot_symbol_period >= 1,
            "pilot_symbol_period",
            self.pilot_symbol_period as f64,
            ">= 1",
        )?;
        ensure(
            self.center() - 0.5 * self.bandwidth >= 0.0,
            "center_offset",
            self.center(),
            ">= bandwidth / 2",
        )?;
        Ok(())
    }

    /// Transform geometry at sample rate `fs`.
    pub fn layout(&self, fs: f64) -> Result<OfdmLayout> {
        self.validate()?;
        let ratio = fs / self.spacing();
        let n_fft = ratio.round();
        ensure(
            (ratio - n_fft).abs() < 1e-6 && n_fft >= 2.0 * self.n_subcarriers as f64,
            "sample_rate",
            fs,
            "an integer multiple of the subcarrier spacing, at least 2x the subcarrier count",
        )?;
        let n_fft = n_fft as usize;
        let lower = (self.center() - 0.5 * self.bandwidth) / self.spacing();
        let first_bin = lower.round();
        ensure(
            (lower - first_bin).abs() < 1e-6,
            "center_offset",
            self.center(),
            "a band edge on the subcarrier grid",
        )?;
        let first_bin = first_bin as usize;
        ensure(
            first_bin + self.n_subcarriers < n_fft / 2,
            "center_offset",
            self.center(),
            "a band below Nyquist",
        )?;
        Ok(OfdmLayout {
            n_fft,
            cp_len: (n_fft as f64 * self.cyclic_prefix_fraction).round() as usize,
            first_bin,
            n_subcarriers: self.n_subcarriers,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OfdmLayout {
    pub n_fft: usize,
    pub cp_len: usize,
    pub first_bin: usize,
    pub n_subcarriers: usize,
}

impl OfdmLayout {
    pub fn symbol_len(&self) -> usize {
        self.n_fft + self.cp_len
    }
}

/// Source of data-subcarrier symbols.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// Constellation indices, one per data subcarrier, symbol by symbol.
    Indices(Vec<u16>),
    /// `n_data_symbols` OFDM symbols of uniformly random indices.
    Random { seed: u64, n_data_symbols: usize },
}

/// A modulated frame together with everything the receiver may know.
#[derive(Debug, Clone)]
pub struct OfdmFrame {
    pub waveform: Vec<Complex64>,
    pub layout: OfdmLayout,
    /// `true` for training symbols, in transmission order.
    pub is_training: Vec<bool>,
    /// Reference points of the data symbols, `n_subcarriers` per symbol.
    pub data: Vec<Complex64>,
    pub training: Vec<Complex64>,
}

impl OfdmFrame {
    pub fn n_symbols(&self) -> usize {
        self.is_training.len()
    }
}

/// Known training symbol, QPSK, shared by transmitter and receiver.
pub fn training_symbol(n_subcarriers: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(TRAINING_SEED);
    (0..n_subcarriers)
        .map(|_| Constellation::Qpsk.point(rng.random_range(0..4)))
        .collect()
}

/// Number of data symbols whose frame (with training) fits in `n_samples`.
pub fn data_symbols_fitting(cfg: &OfdmConfig, fs: f64, n_samples: usize) -> Result<usize> {
    let layout = cfg.layout(fs)?;
    let total = n_samples / layout.symbol_len();
    let groups = total.div_ceil(cfg.pilot_symbol_period + 1);
    Ok(total.saturating_sub(groups))
}

/// Raw multicarrier synthesis: one row of subcarrier values per symbol, cyclic
/// prefix prepended, no scaling.
pub fn ofdm_modulate_grid(cfg: &OfdmConfig, fs: f64, grid: &[Vec<Complex64>]) -> Result<Vec<Complex64>> {
    let layout = cfg.layout(fs)?;
    let ifft = FftPlanner::new().plan_fft_inverse(layout.n_fft);
    let mut out = Vec::with_capacity(grid.len() * layout.symbol_len());
    let mut buf = vec![Complex64::default(); layout.n_fft];
    for row in grid {
        if row.len() != cfg.n_subcarriers {
            return Err(Error::Payload(format!(
                "symbol has {} subcarriers, expected {}",
                row.len(),
                cfg.n_subcarriers
            )));
        }
        buf.fill(Complex64::default());
        for (k, &x) in row.iter().enumerate() {
            buf[layout.first_bin + k] = x;
        }
        ifft.process(&mut buf);
        let scale = 1.0 / layout.n_fft as f64;
        out.extend(buf[layout.n_fft - layout.cp_len..].iter().map(|v| v * scale));
        out.extend(buf.iter().map(|v| v * scale));
    }
    Ok(out)
}

/// Full transmitter: maps the payload, inserts training symbols and scales
/// the envelope to unit average power.
pub fn ofdm_modulate(cfg: &OfdmConfig, fs: f64, payload: &Payload) -> Result<OfdmFrame> {
    let layout = cfg.layout(fs)?;
    let n = cfg.n_subcarriers;
    let order = cfg.constellation.order();
    let indices: Vec<u16> = match payload {
        Payload::Indices(ix) => {
            if ix.len() % n != 0 {
                return Err(Error::Payload(format!(
                    "{} indices is not a whole number of {n}-subcarrier symbols",
                    ix.len()
                )));
            }
            if let Some(bad) = ix.iter().find(|&&i| i as usize >= order) {
                return Err(Error::Payload(format!(
                    "index {bad} exceeds constellation order {order}"
                )));
            }
            ix.clone()
        }
        Payload::Random { seed, n_data_symbols } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..n * n_data_symbols)
                .map(|_| rng.random_range(0..order as u16))
                .collect()
        }
    };
    if indices.is_empty() {
        return Err(Error::Payload("empty payload".into()));
    }
    let data: Vec<Complex64> = indices.iter().map(|&i| cfg.constellation.point(i)).collect();
    let training = training_symbol(n);

    let mut grid = Vec::new();
    let mut is_training = Vec::new();
    for (s, chunk) in data.chunks(n).enumerate() {
        if s % cfg.pilot_symbol_period == 0 {
            grid.push(training.clone());
            is_training.push(true);
        }
        grid.push(chunk.to_vec());
        is_training.push(false);
    }
    let mut waveform = ofdm_modulate_grid(cfg, fs, &grid)?;
    let power = waveform.iter().map(|v| v.norm_sqr()).sum::<f64>() / waveform.len() as f64;
    let gain = 1.0 / power.sqrt();
    waveform.iter_mut().for_each(|v| *v *= gain);
    Ok(OfdmFrame {
        waveform,
        layout,
        is_training,
        data,
        training,
    })
}

/// Per-subcarrier and average EVM, in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct EvmReport {
    pub per_subcarrier: Vec<f64>,
    pub average: f64,
}

/// Receiver: symbol timing from the known frame start, one-tap equalizer per
/// subcarrier from the training symbols, EVM against the reference payload.
pub fn ofdm_demodulate_evm(rf: &[f64], frame: &OfdmFrame) -> Result<EvmReport> {
    let layout = frame.layout;
    let n = layout.n_subcarriers;
    let needed = frame.n_symbols() * layout.symbol_len();
    if rf.len() < needed {
        return Err(Error::Demodulation(format!(
            "waveform has {} samples, frame needs {needed}",
            rf.len()
        )));
    }
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(layout.n_fft);
    let mut buf = vec![Complex64::default(); layout.n_fft];
    let mut rx_symbol = |s: usize| -> Vec<Complex64> {
        let start = s * layout.symbol_len() + layout.cp_len;
        for (b, &x) in buf.iter_mut().zip(&rf[start..start + layout.n_fft]) {
            *b = Complex64::new(x, 0.0);
        }
        fft.process(&mut buf);
        buf[layout.first_bin..layout.first_bin + n].to_vec()
    };

    let mut channel = vec![Complex64::default(); n];
    let mut n_train = 0usize;
    for s in (0..frame.n_symbols()).filter(|&s| frame.is_training[s]) {
        let y = rx_symbol(s);
        for k in 0..n {
            channel[k] += y[k] / frame.training[k];
        }
        n_train += 1;
    }
    if n_train == 0 {
        return Err(Error::Demodulation("no training symbol in frame".into()));
    }
    for h in channel.iter_mut() {
        *h /= n_train as f64;
        if !(h.norm() > 0.0 && h.norm().is_finite()) {
            return Err(Error::Demodulation("channel estimate vanished".into()));
        }
    }

    let mut err = vec![0.0; n];
    let mut reference = vec![0.0; n];
    let data_symbols = (0..frame.n_symbols()).filter(|&s| !frame.is_training[s]);
    for (d, s) in data_symbols.enumerate() {
        let y = rx_symbol(s);
        for k in 0..n {
            let x = frame.data[d * n + k];
            err[k] += (y[k] / channel[k] - x).norm_sqr();
            reference[k] += x.norm_sqr();
        }
    }
    let per_subcarrier = err
        .iter()
        .zip(&reference)
        .map(|(e, r)| 100.0 * (e / r).sqrt())
        .collect();
    let average = 100.0 * (err.iter().sum::<f64>() / reference.iter().sum::<f64>()).sqrt();
    Ok(EvmReport {
        per_subcarrier,
        average,
    })
}
