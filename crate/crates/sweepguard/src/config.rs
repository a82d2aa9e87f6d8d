//! Run configuration file.
//!
//! TOML with one table per concern. Every physical key carries its unit in
//! its name; unknown keys are rejected. Defaults are filled in by
//! [`parse_config`] and echoed by [`RunConfig::to_toml`].

use std::path::Path;

use serde::{Deserialize, Serialize};
use sweepguard_core::{FrequencyScan, OdnProfile, OverlapSpec, ReflectionPoint, SweepWaveform};

use crate::error::{Error, Result};
use crate::link::ofdm::{Constellation, OfdmConfig};
use crate::link::scenario::{LockModel, Scenario};
use crate::link::PilotConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "defaults::seed")]
    pub seed: u64,
    #[serde(default = "defaults::output_dir")]
    pub output_dir: String,
    pub sweep: SweepSection,
    pub odn: OdnSection,
    #[serde(default)]
    pub overlap: OverlapSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub ofdm: OfdmSection,
    #[serde(default)]
    pub link: LinkSection,
    #[serde(default)]
    pub pilot: PilotSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub delta_f_hz: f64,
    /// Unset: use the planned common sweep frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_freq_hz: Option<f64>,
    #[serde(default)]
    pub ramp_fraction: f64,
    #[serde(default)]
    pub phase_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdnSection {
    #[serde(default = "defaults::group_index")]
    pub group_index: f64,
    #[serde(default)]
    pub feeder_length_m: f64,
    #[serde(default)]
    pub excess_loss_db: f64,
    #[serde(default)]
    pub reflections: Vec<ReflectionSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectionSection {
    pub reach_m: f64,
    #[serde(default = "defaults::reflectance_db")]
    pub reflectance_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OverlapSection {
    /// Unset: the OFDM bandwidth.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_upper_hz: Option<f64>,
    pub lock_guard_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crosstalk_bandwidth_hz: Option<f64>,
    pub threshold: f64,
    pub oracle_samples: usize,
}

impl Default for OverlapSection {
    fn default() -> Self {
        Self {
            f_upper_hz: None,
            lock_guard_hz: 0.0,
            crosstalk_bandwidth_hz: None,
            threshold: 1.0 / 32.0,
            oracle_samples: sweepguard_core::overlap::DEFAULT_ORACLE_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub f_step_hz: f64,
    pub pi_values: Vec<f64>,
    pub osrr_db: Vec<f64>,
    pub budget_db: Vec<f64>,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            f_lo_hz: 1e3,
            f_hi_hz: 50e3,
            f_step_hz: 10.0,
            pi_values: Vec::new(),
            osrr_db: Vec::new(),
            budget_db: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfdmSection {
    pub n_subcarriers: usize,
    pub bandwidth_hz: f64,
    pub constellation: Constellation,
    pub cyclic_prefix_fraction: f64,
    pub pilot_symbol_period: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center_offset_hz: Option<f64>,
}

impl Default for OfdmSection {
    fn default() -> Self {
        let d = OfdmConfig::default();
        Self {
            n_subcarriers: d.n_subcarriers,
            bandwidth_hz: d.bandwidth,
            constellation: d.constellation,
            cyclic_prefix_fraction: d.cyclic_prefix_fraction,
            pilot_symbol_period: d.pilot_symbol_period,
            center_offset_hz: d.center_offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    pub mitigation_enabled: bool,
    pub locking_range_hz: f64,
    pub sweep_phase_error: f64,
    pub lo_deviation_mismatch_hz: f64,
    pub osrr_db: f64,
    pub loss_budget_db: f64,
    pub launch_power_dbm: f64,
    pub lo_power_dbm: f64,
    pub carrier_to_signal_db: f64,
    pub linewidth_hz: f64,
    /// Received power at which the reflection-free EVM reaches the limit of
    /// the configured constellation; sets the electrical noise.
    pub sensitivity_dbm: f64,
    pub evm_limit_16qam_pct: f64,
    pub evm_limit_qpsk_pct: f64,
    pub duration_periods: f64,
    pub sample_rate_hz: f64,
}

impl Default for LinkSection {
    fn default() -> Self {
        Self {
            mitigation_enabled: true,
            locking_range_hz: LockModel::default().locking_range,
            sweep_phase_error: 0.0,
            lo_deviation_mismatch_hz: 60e6,
            osrr_db: f64::INFINITY,
            loss_budget_db: 26.8,
            launch_power_dbm: 3.5,
            lo_power_dbm: 4.5,
            carrier_to_signal_db: 6.0,
            linewidth_hz: 1e6,
            sensitivity_dbm: -24.4,
            evm_limit_16qam_pct: 12.5,
            evm_limit_qpsk_pct: 17.5,
            duration_periods: 1.0,
            sample_rate_hz: 4e9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PilotMode {
    Locked,
    FreeRunning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PilotSection {
    pub freq_hz: f64,
    pub pilot_to_carrier_db: f64,
    pub mode: PilotMode,
}

impl Default for PilotSection {
    fn default() -> Self {
        let d = PilotConfig::default();
        Self {
            freq_hz: d.freq_hz,
            pilot_to_carrier_db: d.pilot_to_carrier_db,
            mode: PilotMode::Locked,
        }
    }
}

mod defaults {
    pub fn seed() -> u64 {
        1
    }
    pub fn output_dir() -> String {
        "out".into()
    }
    pub fn group_index() -> f64 {
        1.4683
    }
    pub fn reflectance_db() -> f64 {
        -14.0
    }
}

fn invalid(path: impl Into<String>, value: impl std::fmt::Display, expected: &str) -> Error {
    Error::Config {
        path: path.into(),
        message: format!("{value} is out of range, expected {expected}"),
    }
}

fn check(cond: bool, path: &str, value: f64, expected: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(invalid(path, value, expected))
    }
}

/// Reads, parses and validates a configuration file, filling in defaults.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::Config {
        path: "<file>".into(),
        message: e.message().to_string(),
    })?;
    let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().message().to_string(),
    })?;
    cfg.resolve();
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Fills defaults that depend on other keys.
    fn resolve(&mut self) {
        if self.overlap.f_upper_hz.is_none() {
            self.overlap.f_upper_hz = Some(self.ofdm.bandwidth_hz);
        }
    }

    /// Range checks with the offending key path in the error.
    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        check(
            s.delta_f_hz > 0.0 && s.delta_f_hz.is_finite(),
            "sweep.delta_f_hz",
            s.delta_f_hz,
            "> 0",
        )?;
        if let Some(f) = s.sweep_freq_hz {
            check(f > 0.0 && f.is_finite(), "sweep.sweep_freq_hz", f, "> 0")?;
        }
        check(
            (0.0..0.5).contains(&s.ramp_fraction),
            "sweep.ramp_fraction",
            s.ramp_fraction,
            "in [0, 0.5)",
        )?;
        check(
            (0.0..1.0).contains(&s.phase_offset),
            "sweep.phase_offset",
            s.phase_offset,
            "in [0, 1)",
        )?;

        let o = &self.odn;
        check(
            o.group_index > 1.0 && o.group_index < 2.0,
            "odn.group_index",
            o.group_index,
            "in (1, 2)",
        )?;
        check(
            o.feeder_length_m >= 0.0,
            "odn.feeder_length_m",
            o.feeder_length_m,
            ">= 0",
        )?;
        check(o.excess_loss_db >= 0.0, "odn.excess_loss_db", o.excess_loss_db, ">= 0")?;
        for (i, r) in o.reflections.iter().enumerate() {
            check(
                r.reach_m > 0.0 && r.reach_m.is_finite(),
                &format!("odn.reflections[{i}].reach_m"),
                r.reach_m,
                "> 0",
            )?;
            check(
                r.reflectance_db <= 0.0,
                &format!("odn.reflections[{i}].reflectance_db"),
                r.reflectance_db,
                "<= 0",
            )?;
        }

        let v = &self.overlap;
        if let Some(f) = v.f_upper_hz {
            check(f >= 0.0 && f.is_finite(), "overlap.f_upper_hz", f, ">= 0")?;
        }
        check(v.lock_guard_hz >= 0.0, "overlap.lock_guard_hz", v.lock_guard_hz, ">= 0")?;
        if let Some(b) = v.crosstalk_bandwidth_hz {
            check(b >= 0.0, "overlap.crosstalk_bandwidth_hz", b, ">= 0")?;
        }
        check(
            (0.0..=1.0).contains(&v.threshold),
            "overlap.threshold",
            v.threshold,
            "in [0, 1]",
        )?;
        check(
            v.oracle_samples >= sweepguard_core::overlap::MIN_ORACLE_SAMPLES,
            "overlap.oracle_samples",
            v.oracle_samples as f64,
            ">= 1024",
        )?;

        let c = &self.scan;
        check(c.f_lo_hz > 0.0, "scan.f_lo_hz", c.f_lo_hz, "> 0")?;
        check(c.f_hi_hz > c.f_lo_hz, "scan.f_hi_hz", c.f_hi_hz, "> scan.f_lo_hz")?;
        check(c.f_step_hz > 0.0, "scan.f_step_hz", c.f_step_hz, "> 0")?;
        for (i, &p) in c.pi_values.iter().enumerate() {
            check(p >= 0.0 && p.is_finite(), &format!("scan.pi_values[{i}]"), p, ">= 0")?;
        }
        for (i, &x) in c.osrr_db.iter().enumerate() {
            check(!x.is_nan(), &format!("scan.osrr_db[{i}]"), x, "a number")?;
        }
        for (i, &x) in c.budget_db.iter().enumerate() {
            check(x.is_finite(), &format!("scan.budget_db[{i}]"), x, "finite")?;
        }

        let f = &self.ofdm;
        check(
            f.n_subcarriers >= 2 && f.n_subcarriers.is_power_of_two(),
            "ofdm.n_subcarriers",
            f.n_subcarriers as f64,
            "a power of two >= 2",
        )?;
        check(f.bandwidth_hz > 0.0, "ofdm.bandwidth_hz", f.bandwidth_hz, "> 0")?;
        check(
            (0.0..1.0).contains(&f.cyclic_prefix_fraction),
            "ofdm.cyclic_prefix_fraction",
            f.cyclic_prefix_fraction,
            "in [0, 1)",
        )?;
        check(
            f.pilot_symbol_period >= 1,
            "ofdm.pilot_symbol_period",
            f.pilot_symbol_period as f64,
            ">= 1",
        )?;
        self.ofdm_config()
            .layout(self.link.sample_rate_hz)
            .map_err(|e| Error::Config {
                path: "ofdm".into(),
                message: e.to_string(),
            })?;

        let l = &self.link;
        check(
            l.locking_range_hz > 0.0,
            "link.locking_range_hz",
            l.locking_range_hz,
            "> 0",
        )?;
        check(
            l.sweep_phase_error.is_finite(),
            "link.sweep_phase_error",
            l.sweep_phase_error,
            "finite",
        )?;
        check(
            l.lo_deviation_mismatch_hz > -s.delta_f_hz,
            "link.lo_deviation_mismatch_hz",
            l.lo_deviation_mismatch_hz,
            "> -sweep.delta_f_hz",
        )?;
        check(!l.osrr_db.is_nan(), "link.osrr_db", l.osrr_db, "a number or inf")?;
        for (name, x) in [
            ("link.loss_budget_db", l.loss_budget_db),
            ("link.launch_power_dbm", l.launch_power_dbm),
            ("link.lo_power_dbm", l.lo_power_dbm),
            ("link.carrier_to_signal_db", l.carrier_to_signal_db),
            ("link.sensitivity_dbm", l.sensitivity_dbm),
        ] {
            check(x.is_finite(), name, x, "finite")?;
        }
        check(l.linewidth_hz >= 0.0, "link.linewidth_hz", l.linewidth_hz, ">= 0")?;
        check(
            l.evm_limit_16qam_pct > 0.0,
            "link.evm_limit_16qam_pct",
            l.evm_limit_16qam_pct,
            "> 0",
        )?;
        check(
            l.evm_limit_qpsk_pct > 0.0,
            "link.evm_limit_qpsk_pct",
            l.evm_limit_qpsk_pct,
            "> 0",
        )?;
        check(
            l.duration_periods >= 1.0,
            "link.duration_periods",
            l.duration_periods,
            ">= 1",
        )?;
        let min_rate = 2.0 * (s.delta_f_hz + self.ofdm_config().top_frequency());
        check(
            l.sample_rate_hz > min_rate,
            "link.sample_rate_hz",
            l.sample_rate_hz,
            &format!("> {min_rate}"),
        )?;

        let p = &self.pilot;
        check(
            p.freq_hz > 0.0 && p.freq_hz + s.delta_f_hz < l.sample_rate_hz / 2.0,
            "pilot.freq_hz",
            p.freq_hz,
            "> 0 with pilot + sweep below Nyquist",
        )?;
        check(
            p.pilot_to_carrier_db.is_finite(),
            "pilot.pilot_to_carrier_db",
            p.pilot_to_carrier_db,
            "finite",
        )?;
        Ok(())
    }

    /// The configuration as TOML, defaults included. Parsing it back yields an
    /// identical configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn odn_profile(&self) -> Result<OdnProfile> {
        let reflections = self
            .odn
            .reflections
            .iter()
            .map(|r| ReflectionPoint::new(r.reach_m, r.reflectance_db))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let mut odn = OdnProfile::new(self.odn.group_index, reflections)?;
        odn.feeder_length = self.odn.feeder_length_m;
        odn.excess_loss_db = self.odn.excess_loss_db;
        Ok(odn)
    }

    pub fn overlap_spec(&self) -> Result<OverlapSpec> {
        let f_upper = self.overlap.f_upper_hz.unwrap_or(self.ofdm.bandwidth_hz);
        let spec = OverlapSpec::new(f_upper, self.overlap.lock_guard_hz, self.sweep.delta_f_hz)?;
        Ok(match self.overlap.crosstalk_bandwidth_hz {
            Some(b) => spec.with_crosstalk_bandwidth(b)?,
            None => spec,
        })
    }

    pub fn frequency_scan(&self) -> Result<FrequencyScan> {
        let mut scan = FrequencyScan::new(self.scan.f_lo_hz, self.scan.f_hi_hz, self.scan.f_step_hz)?;
        scan.oracle_samples = self.overlap.oracle_samples;
        scan.validate()?;
        Ok(scan)
    }

    /// Sweep waveform at the given repetition rate.
    pub fn waveform(&self, sweep_freq: f64) -> Result<SweepWaveform> {
        Ok(SweepWaveform::new(
            self.sweep.delta_f_hz,
            sweep_freq,
            self.sweep.ramp_fraction,
            self.sweep.phase_offset,
        )?)
    }

    pub fn ofdm_config(&self) -> OfdmConfig {
        OfdmConfig {
            n_subcarriers: self.ofdm.n_subcarriers,
            bandwidth: self.ofdm.bandwidth_hz,
            constellation: self.ofdm.constellation,
            cyclic_prefix_fraction: self.ofdm.cyclic_prefix_fraction,
            pilot_symbol_period: self.ofdm.pilot_symbol_period,
            center_offset: self.ofdm.center_offset_hz,
        }
    }

    pub fn pilot_config(&self) -> PilotConfig {
        PilotConfig {
            freq_hz: self.pilot.freq_hz,
            pilot_to_carrier_db: self.pilot.pilot_to_carrier_db,
        }
    }

    pub fn evm_limit_pct(&self) -> f64 {
        match self.ofdm.constellation {
            Constellation::Qam16 => self.link.evm_limit_16qam_pct,
            Constellation::Qpsk => self.link.evm_limit_qpsk_pct,
        }
    }

    /// Link scenario around `sweep`, with the electrical noise calibrated to
    /// the configured sensitivity.
    pub fn scenario(&self, sweep: SweepWaveform) -> Result<Scenario> {
        let l = &self.link;
        let mut sc = Scenario::new(self.odn_profile()?, sweep);
        sc.mitigation_enabled = l.mitigation_enabled;
        sc.sweep_phase_error = l.sweep_phase_error;
        sc.lo_deviation_mismatch = l.lo_deviation_mismatch_hz;
        sc.lock = LockModel {
            locking_range: l.locking_range_hz,
        };
        sc.osrr_db = l.osrr_db;
        sc.loss_budget_db = l.loss_budget_db;
        sc.launch_power_dbm = l.launch_power_dbm;
        sc.lo_power_dbm = l.lo_power_dbm;
        sc.carrier_to_signal_db = l.carrier_to_signal_db;
        sc.linewidth = l.linewidth_hz;
        sc.duration_periods = l.duration_periods;
        sc.sample_rate = l.sample_rate_hz;
        sc.seed = self.seed;
        sc.calibrate_noise(&self.ofdm_config(), l.sensitivity_dbm, self.evm_limit_pct());
        Ok(sc)
    }
}
