//! Optical fields at the receiver and their square-law detection.
//!
//! Fields are complex baseband envelopes in sqrt(mW) relative to the nominal
//! wavelength. Phases are tracked in cycles and only turned into complex
//! rotations at the point of use.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sweepguard_core::SweepWaveform;

use crate::error::{ensure, Result};
use crate::link::scenario::Scenario;

const STREAM_TX_NOISE: u64 = 1;
const STREAM_LO_NOISE: u64 = 2;
const STREAM_AWGN: u64 = 3;

/// Frequency trajectory of a laser relative to the nominal wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Carrier {
    Static,
    Swept(SweepWaveform),
}

impl Carrier {
    pub fn frequency(&self, t: f64) -> f64 {
        match self {
            Carrier::Static => 0.0,
            Carrier::Swept(w) => w.instantaneous_frequency(t),
        }
    }

    /// Phase in cycles; only differences are meaningful.
    pub fn phase(&self, t: f64) -> f64 {
        match self {
            Carrier::Static => 0.0,
            Carrier::Swept(w) => w.phase_since_origin(t),
        }
    }
}

/// What the receiver laser emitted towards the network, sample by sample.
///
/// Index `j` covers time `(j - history) / fs`; samples before zero are the
/// pre-roll, during which the LO is taken to be locked.
#[derive(Debug, Clone, PartialEq)]
pub struct LoEmission {
    /// LO phase minus transmitter phase, cycles.
    pub deviation: Vec<f64>,
    pub locked: Vec<bool>,
}

impl LoEmission {
    fn all_locked(len: usize) -> Self {
        Self {
            deviation: vec![0.0; len],
            locked: vec![true; len],
        }
    }
}

/// Received optical field, split by origin.
#[derive(Debug, Clone)]
pub struct RxField {
    pub signal: Vec<Complex64>,
    pub reflection: Vec<Complex64>,
}

/// Outcome of one detection pass.
#[derive(Debug, Clone)]
pub struct Detection {
    /// AC-coupled photocurrent, mW.
    pub rf: Vec<f64>,
    /// Lock state for each sample of the record.
    pub locked: Vec<bool>,
    pub emission: LoEmission,
    pub rx: RxField,
}

impl Detection {
    pub fn lock_fraction(&self) -> f64 {
        if self.locked.is_empty() {
            return 1.0;
        }
        self.locked.iter().filter(|&&l| l).count() as f64 / self.locked.len() as f64
    }
}

/// Everything about a record that does not depend on the lock state.
pub struct Link {
    pub n: usize,
    pub history: usize,
    pub fs: f64,
    pub tx: Carrier,
    pub lo: Carrier,
    rx_power: f64,
    lo_power: f64,
    signal_power_limit: f64,
    locking_range: f64,
    noise_std: f64,
    seed: u64,
    /// Round-trip delays in samples.
    delays: Vec<f64>,
    amplitudes: Vec<f64>,
    tx_noise: Vec<f64>,
    lo_noise: Vec<f64>,
    tx_phase: Vec<f64>,
    lo_phase: Vec<f64>,
}

impl Link {
    pub fn prepare(sc: &Scenario, n: usize) -> Result<Self> {
        sc.validate(None)?;
        ensure(n > 0, "record length", n as f64, ">= 1 sample")?;
        let fs = sc.sample_rate;
        let (tx, lo) = if sc.mitigation_enabled {
            let lo = sc
                .sweep
                .with_delta_f(sc.sweep.delta_f() + sc.lo_deviation_mismatch)?
                .with_phase_offset(sc.sweep.phase_offset() + sc.sweep_phase_error)?;
            (Carrier::Swept(sc.sweep), Carrier::Swept(lo))
        } else {
            (Carrier::Static, Carrier::Static)
        };

        let reflected = sc.reflected_power();
        let (delays, amplitudes) = if reflected > 0.0 {
            let weights: Vec<f64> = sc
                .odn
                .reflections
                .iter()
                .map(|r| 10f64.powf(r.reflectance_db / 10.0))
                .collect();
            let total: f64 = weights.iter().sum();
            let delays = sc.odn.delays()?.into_iter().map(|d| d * fs).collect::<Vec<_>>();
            let amps = weights.iter().map(|w| (reflected * w / total).sqrt()).collect();
            (delays, amps)
        } else {
            (Vec::new(), Vec::new())
        };
        let history = delays.iter().fold(0.0f64, |a, &d| a.max(d)).ceil() as usize + 2;
        let len = history + n;

        let t = |j: usize| (j as f64 - history as f64) / fs;
        let tx_phase = (0..len).map(|j| tx.phase(t(j))).collect();
        let lo_phase = (0..len).map(|j| lo.phase(t(j))).collect();
        let step_var = sc.linewidth / (TAU * fs);

        Ok(Self {
            n,
            history,
            fs,
            tx,
            lo,
            rx_power: sc.received_power(),
            lo_power: sc.lo_power(),
            signal_power_limit: sc.received_power(),
            locking_range: sc.lock.locking_range,
            noise_std: (sc.noise_density * fs / 2.0).sqrt(),
            seed: sc.seed,
            delays,
            amplitudes,
            tx_noise: wiener(sc.seed, STREAM_TX_NOISE, len, step_var),
            lo_noise: wiener(sc.seed, STREAM_LO_NOISE, len, step_var),
            tx_phase,
            lo_phase,
        })
    }

    fn time(&self, j: usize) -> f64 {
        (j as f64 - self.history as f64) / self.fs
    }

    /// Transmitter field for the given modulation envelope (unit power) and
    /// carrier share, plus the reflection of the given LO emission.
    pub fn propagate(&self, envelope: &[Complex64], carrier_fraction: f64, emission: &LoEmission) -> RxField {
        let a_c = carrier_fraction.sqrt();
        let a_s = (1.0 - carrier_fraction).sqrt();
        let amp = self.rx_power.sqrt();
        let mut signal = Vec::with_capacity(self.n);
        let mut reflection = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let j = i + self.history;
            let s = envelope.get(i).copied().unwrap_or_default();
            let psi = self.tx_phase[j] + self.tx_noise[j];
            signal.push(amp * (a_c + a_s * s) * cis(psi));

            let t = self.time(j);
            let mut r = Complex64::default();
            for (&d, &a) in self.delays.iter().zip(&self.amplitudes) {
                let x = j as f64 - d;
                let extra = lerp(&self.tx_noise, x) + lerp(&emission.deviation, x);
                r += a * cis(self.tx.phase(t - d / self.fs) + extra);
            }
            reflection.push(r);
        }
        RxField { signal, reflection }
    }

    /// Frequency the LO was emitting at fractional sample index `x`.
    fn emitted_frequency(&self, emission: &LoEmission, x: f64) -> f64 {
        let j = (x.round().max(0.0) as usize).min(emission.locked.len() - 1);
        let t = x / self.fs - self.history as f64 / self.fs;
        if emission.locked[j] {
            self.tx.frequency(t)
        } else {
            self.lo.frequency(t)
        }
    }

    /// Square-law detection against the LO. The lock state of every sample is
    /// decided from the free-running LO detuning and the reflected power that
    /// falls inside the locking range, given the emission history `assumed`.
    pub fn detect(&self, rx: RxField, assumed: &LoEmission) -> Detection {
        let mut emission = assumed.clone();
        let mut locked = Vec::with_capacity(self.n);
        let mut rf = Vec::with_capacity(self.n);
        let lo_amp = self.lo_power.sqrt();
        let mut dev = 0.0;
        let mut was_locked = true;
        for i in 0..self.n {
            let j = i + self.history;
            let t = self.time(j);
            let f_tx = self.tx.frequency(t);
            let free_ok = (self.lo.frequency(t) - f_tx).abs() < self.locking_range;
            let mut in_guard = 0.0;
            for (&d, &a) in self.delays.iter().zip(&self.amplitudes) {
                let f = self.emitted_frequency(assumed, j as f64 - d);
                if (f - f_tx).abs() < self.locking_range {
                    in_guard += a * a;
                }
            }
            let lock = free_ok && in_guard <= self.signal_power_limit;
            dev = if lock {
                0.0
            } else {
                let prev = if was_locked { 0.0 } else { dev };
                prev + (self.lo_phase[j] - self.lo_phase[j - 1]) - (self.tx_phase[j] - self.tx_phase[j - 1])
                    + (self.lo_noise[j] - self.lo_noise[j - 1])
                    - (self.tx_noise[j] - self.tx_noise[j - 1])
            };
            was_locked = lock;
            emission.deviation[j] = dev;
            emission.locked[j] = lock;
            locked.push(lock);

            let psi_lo = self.tx_phase[j] + self.tx_noise[j] + dev;
            let field = (rx.signal[i] + rx.reflection[i]) * cis(-psi_lo) + lo_amp;
            rf.push(field.norm_sqr());
        }
        let mean = rf.iter().sum::<f64>() / rf.len() as f64;
        let mut rng = stream(self.seed, STREAM_AWGN);
        if self.noise_std > 0.0 {
            let normal = Normal::new(0.0, self.noise_std).expect("finite noise level");
            rf.iter_mut().for_each(|v| *v += normal.sample(&mut rng) - mean);
        } else {
            rf.iter_mut().for_each(|v| *v -= mean);
        }
        Detection {
            rf,
            locked,
            emission,
            rx,
        }
    }

    /// Propagates and detects until the lock series is self-consistent with
    /// the emission it produced, starting from a permanently locked LO.
    pub fn run(&self, envelope: &[Complex64], carrier_fraction: f64) -> Detection {
        let mut emission = LoEmission::all_locked(self.history + self.n);
        let min_delay = self.delays.iter().fold(f64::INFINITY, |a, &d| a.min(d));
        let max_iter = if min_delay.is_finite() {
            (self.n as f64 / min_delay.max(1.0)).ceil() as usize + 2
        } else {
            1
        };
        let mut det = self.detect(self.propagate(envelope, carrier_fraction, &emission), &emission);
        for _ in 1..max_iter {
            if det.emission.locked == emission.locked {
                break;
            }
            emission = det.emission.clone();
            det = self.detect(self.propagate(envelope, carrier_fraction, &emission), &emission);
        }
        det
    }
}

/// Baseband field of the transmitter alone beaten against a stable, unswept
/// reference of LO power. Shows the raw transmitter sweep.
pub fn free_running_beat(sc: &Scenario, envelope: &[Complex64], n: usize) -> Result<Vec<f64>> {
    let link = Link::prepare(sc, n)?;
    let empty = LoEmission::all_locked(link.history + n);
    let rx = link.propagate(envelope, sc.carrier_fraction(), &empty);
    let lo_amp = link.lo_power.sqrt();
    let mut rf: Vec<f64> = rx.signal.iter().map(|s| (s + lo_amp).norm_sqr()).collect();
    let mean = rf.iter().sum::<f64>() / n as f64;
    rf.iter_mut().for_each(|v| *v -= mean);
    Ok(rf)
}

pub(crate) fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Random-walk phase in cycles with the given per-sample variance.
fn wiener(seed: u64, id: u64, len: usize, step_var: f64) -> Vec<f64> {
    if step_var == 0.0 {
        return vec![0.0; len];
    }
    let mut rng = stream(seed, id);
    let normal = Normal::new(0.0, step_var.sqrt()).expect("finite linewidth");
    let mut acc = 0.0;
    (0..len)
        .map(|_| {
            acc += normal.sample(&mut rng);
            acc
        })
        .collect()
}

fn lerp(v: &[f64], x: f64) -> f64 {
    let x = x.clamp(0.0, (v.len() - 1) as f64);
    let i = x.floor() as usize;
    if i + 1 >= v.len() {
        return v[v.len() - 1];
    }
    let w = x - i as f64;
    v[i] * (1.0 - w) + v[i + 1] * w
}

fn cis(cycles: f64) -> Complex64 {
    Complex64::cis(TAU * (cycles - cycles.floor()))
}
