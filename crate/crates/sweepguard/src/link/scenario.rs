use sweepguard_core::{OdnProfile, SweepWaveform};

use crate::error::{ensure, Result};
use crate::link::ofdm::OfdmConfig;

/// Injection-locking guard band of the receiver laser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockModel {
    /// Largest detuning the slave laser follows, Hz.
    pub locking_range: f64,
}

impl Default for LockModel {
    fn default() -> Self {
        Self { locking_range: 100e6 }
    }
}

/// One simulated operating point of the swept homodyne link.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub odn: OdnProfile,
    /// Sweep shared by the transmitter seed laser and the receiver LO.
    pub sweep: SweepWaveform,
    /// `false` runs both lasers at static, unswept wavelengths.
    pub mitigation_enabled: bool,
    /// LO start-phase error relative to the arriving sweep, fraction of a period.
    pub sweep_phase_error: f64,
    /// Extra peak deviation of the free-running LO sweep, Hz.
    pub lo_deviation_mismatch: f64,
    pub lock: LockModel,
    /// Signal-to-reflection ratio at the receiver input; `+inf` removes the reflection.
    pub osrr_db: f64,
    pub loss_budget_db: f64,
    pub launch_power_dbm: f64,
    pub lo_power_dbm: f64,
    /// Power of the residual optical carrier over the modulated sidebands.
    pub carrier_to_signal_db: f64,
    /// Laser linewidth of transmitter and LO, Hz.
    pub linewidth: f64,
    /// One-sided PSD of the detected electrical noise, mW²/Hz.
    pub noise_density: f64,
    pub duration_periods: f64,
    pub sample_rate: f64,
    pub seed: u64,
}

impl Scenario {
    /// Scenario with the default link settings around the given network and sweep.
    pub fn new(odn: OdnProfile, sweep: SweepWaveform) -> Self {
        Self {
            odn,
            sweep,
            mitigation_enabled: true,
            sweep_phase_error: 0.0,
            lo_deviation_mismatch: 60e6,
            lock: LockModel::default(),
            osrr_db: f64::INFINITY,
            loss_budget_db: 26.8,
            launch_power_dbm: 3.5,
            lo_power_dbm: 4.5,
            carrier_to_signal_db: 6.0,
            linewidth: 1e6,
            noise_density: 0.0,
            duration_periods: 1.0,
            sample_rate: 4e9,
            seed: 1,
        }
    }

    pub fn validate(&self, ofdm: Option<&OfdmConfig>) -> Result<()> {
        self.odn.validate()?;
        ensure(
            self.lock.locking_range > 0.0,
            "locking_range",
            self.lock.locking_range,
            "> 0 Hz",
        )?;
        ensure(!self.osrr_db.is_nan(), "osrr", self.osrr_db, "a number of dB or +inf")?;
        ensure(self.linewidth >= 0.0, "linewidth", self.linewidth, ">= 0 Hz")?;
        ensure(self.noise_density >= 0.0, "noise_density", self.noise_density, ">= 0")?;
        ensure(
            self.duration_periods >= 1.0,
            "duration",
            self.duration_periods,
            ">= 1 sweep period",
        )?;
        ensure(
            self.sweep_phase_error.is_finite(),
            "sweep_phase_error",
            self.sweep_phase_error,
            "a finite fraction of a period",
        )?;
        ensure(
            self.sweep.delta_f() + self.lo_deviation_mismatch > 0.0,
            "lo_deviation_mismatch",
            self.lo_deviation_mismatch,
            "> -delta_f",
        )?;
        let top = ofdm.map_or(0.0, |c| c.top_frequency());
        let min_rate = 2.0 * (self.sweep.delta_f() + top);
        ensure(
            self.sample_rate > min_rate,
            "sample_rate",
            self.sample_rate,
            &format!("> {min_rate} Hz"),
        )?;
        Ok(())
    }

    /// Received optical power, mW.
    pub fn received_power(&self) -> f64 {
        dbm_to_mw(self.launch_power_dbm - self.loss_budget_db)
    }

    pub fn lo_power(&self) -> f64 {
        dbm_to_mw(self.lo_power_dbm)
    }

    /// Share of the received power in the unmodulated carrier.
    pub fn carrier_fraction(&self) -> f64 {
        let ratio = 10f64.powf(self.carrier_to_signal_db / 10.0);
        ratio / (1.0 + ratio)
    }

    /// Total reflected power at the receiver input, mW.
    pub fn reflected_power(&self) -> f64 {
        if self.osrr_db.is_infinite() && self.osrr_db > 0.0 || self.odn.reflections.is_empty() {
            0.0
        } else {
            self.received_power() / 10f64.powf(self.osrr_db / 10.0)
        }
    }

    pub fn period(&self) -> f64 {
        self.sweep.period()
    }

    /// Noise density that puts the reflection-free EVM at `evm_pct` when the
    /// received power equals `sensitivity_dbm`.
    pub fn calibrate_noise(&mut self, ofdm: &OfdmConfig, sensitivity_dbm: f64, evm_pct: f64) {
        self.noise_density = noise_density_for(
            evm_pct,
            dbm_to_mw(sensitivity_dbm),
            self.lo_power(),
            self.carrier_fraction(),
            ofdm.bandwidth,
        );
    }
}

/// The detected OFDM power is `2·P_lo·P_rx·(1 − carrier share)`; white noise of
/// one-sided density `N0` contributes `N0·B` over the band.
pub fn noise_density_for(evm_pct: f64, rx_power: f64, lo_power: f64, carrier_fraction: f64, bandwidth: f64) -> f64 {
    let evm = evm_pct / 100.0;
    evm * evm * 2.0 * lo_power * rx_power * (1.0 - carrier_fraction) / bandwidth
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}
