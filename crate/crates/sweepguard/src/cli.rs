use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use sweepguard_core::planner::{overlap_map, plan_common_sweep};
use sweepguard_core::{SecondAxis, SweepPlan, SweepWaveform};

use crate::config::{parse_config, PilotMode, RunConfig};
use crate::error::{Error, Result};
use crate::link::{pilot_beat_spectrum, run_link_experiment, Case, ScanAxis};
use crate::output;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Per-reflection SFRs, their intersection and the common sweep frequency.
    Plan,
    /// Overlap probability over sweep frequency and Π.
    Map,
    /// Per-reflection SFRs only.
    Sfr,
    /// The four link cases at the configured operating point.
    Simulate,
    /// The four cases over `scan.osrr_db`.
    OsrrScan,
    /// The four cases over `scan.budget_db`, reflected power held fixed.
    BudgetScan,
    /// Pilot-tone spectrum and peak track.
    Pilot,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Plan => "plan",
            Command::Map => "map",
            Command::Sfr => "sfr",
            Command::Simulate => "simulate",
            Command::OsrrScan => "osrr-scan",
            Command::BudgetScan => "budget-scan",
            Command::Pilot => "pilot",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sweepguard",
    version,
    about = "Sweep planning and link simulation for reflection-tolerant homodyne PON links"
)]
pub struct Cli {
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Runs one command and returns the files it wrote.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let mut cfg = parse_config(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    execute(cli.command, cfg, &out)
}

fn plan(cfg: &RunConfig) -> Result<SweepPlan> {
    Ok(plan_common_sweep(
        &cfg.odn_profile()?,
        &cfg.overlap_spec()?,
        cfg.sweep.ramp_fraction,
        cfg.overlap.threshold,
        &cfg.frequency_scan()?,
    )?)
}

/// Configured sweep, or the planned κ when the config leaves it open.
fn resolve_sweep(command: Command, cfg: &mut RunConfig) -> Result<SweepWaveform> {
    if cfg.sweep.sweep_freq_hz.is_none() {
        if cfg.odn.reflections.is_empty() {
            return Err(Error::MissingInput {
                command: command.name(),
                what: "sweep.sweep_freq_hz or at least one odn.reflections entry",
            });
        }
        let kappa = plan(cfg)?.chosen_frequency.ok_or(Error::NoCompatibleFrequency)?;
        cfg.sweep.sweep_freq_hz = Some(kappa);
    }
    cfg.waveform(cfg.sweep.sweep_freq_hz.expect("set above"))
}

fn require<'a>(command: Command, values: &'a [f64], what: &'static str) -> Result<&'a [f64]> {
    if values.is_empty() {
        Err(Error::MissingInput {
            command: command.name(),
            what,
        })
    } else {
        Ok(values)
    }
}

pub fn execute(command: Command, mut cfg: RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    match command {
        Command::Plan | Command::Sfr => {
            let p = plan(&cfg)?;
            if command == Command::Plan {
                written.push(output::write(out, "plan.csv", &output::plan_csv(&p))?);
            } else {
                written.push(output::write(out, "sfr.csv", &output::sfr_csv(&p))?);
            }
            written.push(output::write(out, "resolved_config.toml", &cfg.to_toml())?);
            if command == Command::Plan && p.chosen_frequency.is_none() {
                return Err(Error::NoCompatibleFrequency);
            }
        }
        Command::Map => {
            let pis = require(command, &cfg.scan.pi_values, "scan.pi_values")?.to_vec();
            let m = overlap_map(
                &cfg.odn_profile()?,
                &cfg.overlap_spec()?,
                SecondAxis::PiEff(pis),
                &cfg.frequency_scan()?.points(),
                cfg.sweep.ramp_fraction,
                cfg.overlap.oracle_samples,
            )?;
            written.push(output::write(out, "map.csv", &output::map_csv(&m))?);
            written.push(output::write(out, "resolved_config.toml", &cfg.to_toml())?);
        }
        Command::Simulate | Command::OsrrScan | Command::BudgetScan => {
            let axis = match command {
                Command::OsrrScan => ScanAxis::Osrr(require(command, &cfg.scan.osrr_db, "scan.osrr_db")?.to_vec()),
                Command::BudgetScan => {
                    ScanAxis::Budget(require(command, &cfg.scan.budget_db, "scan.budget_db")?.to_vec())
                }
                _ => ScanAxis::Single,
            };
            let sweep = resolve_sweep(command, &mut cfg)?;
            let sc = cfg.scenario(sweep)?;
            let outcomes = run_link_experiment(&sc, &cfg.ofdm_config(), &axis)?;
            written.push(output::write(out, "summary.csv", &output::summary_csv(&outcomes))?);
            written.push(output::write(out, "resolved_config.toml", &cfg.to_toml())?);
            if command == Command::Simulate {
                let reflected = sc.osrr_db.is_finite() && !sc.odn.reflections.is_empty();
                let wanted = match (reflected, sc.mitigation_enabled) {
                    (false, false) => Case::NoFrStatic,
                    (false, true) => Case::NoFrSwept,
                    (true, false) => Case::FrStatic,
                    (true, true) => Case::FrSwept,
                };
                let o = outcomes
                    .into_iter()
                    .find(|o| o.case == wanted)
                    .expect("every case is run");
                let r = o.result?;
                written.push(output::write(out, "evm.csv", &output::evm_csv(&r))?);
                written.push(output::write(out, "spectrum.csv", &output::spectrum_csv(&r.spectrum))?);
            }
        }
        Command::Pilot => {
            let sweep = resolve_sweep(command, &mut cfg)?;
            let sc = cfg.scenario(sweep)?;
            let locked = cfg.pilot.mode == PilotMode::Locked;
            let r = pilot_beat_spectrum(&sc, &cfg.pilot_config(), locked)?;
            written.push(output::write(out, "spectrum.csv", &output::spectrum_csv(&r.spectrum))?);
            written.push(output::write(out, "pilot_track.csv", &output::track_csv(&r.track))?);
            written.push(output::write(out, "resolved_config.toml", &cfg.to_toml())?);
        }
    }
    Ok(written)
}
