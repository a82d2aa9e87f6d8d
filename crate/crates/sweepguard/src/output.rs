//! CSV artifacts. Numbers use Rust's shortest round-trip formatting, which is
//! locale independent; missing values are empty cells.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sweepguard_core::{OverlapMap, SecondAxis, SweepPlan};

use crate::error::Result;
use crate::link::spectrum::{SpectrumPoint, TrackPoint};
use crate::link::{CaseOutcome, LinkResult};

pub const PLAN_HEADER: &str = "reach_m,f_opt_hz,sfr_lo_hz,sfr_hi_hz,common_lo_hz,common_hi_hz,kappa_hz,worst_overlap";
pub const SFR_HEADER: &str = "reach_m,f_opt_hz,sfr_lo_hz,sfr_hi_hz";
pub const MAP_HEADER: &str = "f_hz,pi_eff,overlap_prob";
pub const EVM_HEADER: &str = "subcarrier,evm_pct";
pub const SUMMARY_HEADER: &str = "case,osrr_db,budget_db,evm_avg_pct,penalty_pct,lock_fraction";
pub const SPECTRUM_HEADER: &str = "freq_hz,power_db";
pub const TRACK_HEADER: &str = "t_s,f_peak_hz";

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn table(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// One row per reflection and compatible interval. The common columns hold
/// the interval containing κ and repeat on every row.
pub fn plan_csv(plan: &SweepPlan) -> String {
    let common = plan.chosen_interval();
    let (c_lo, c_hi) = (opt(common.map(|c| c.lo)), opt(common.map(|c| c.hi)));
    let kappa = opt(plan.chosen_frequency);
    let worst = opt(plan.worst_overlap);
    let mut rows = Vec::new();
    for p in &plan.per_fr {
        let bounds: Vec<(String, String)> = if p.sfr.is_empty() {
            vec![(String::new(), String::new())]
        } else {
            p.sfr.iter().map(|iv| (num(iv.lo), num(iv.hi))).collect()
        };
        for (lo, hi) in bounds {
            rows.push(vec![
                num(p.reach),
                num(p.f_opt),
                lo,
                hi,
                c_lo.clone(),
                c_hi.clone(),
                kappa.clone(),
                worst.clone(),
            ]);
        }
    }
    table(PLAN_HEADER, rows)
}

pub fn sfr_csv(plan: &SweepPlan) -> String {
    let rows = plan.per_fr.iter().flat_map(|p| {
        p.sfr
            .iter()
            .map(|iv| vec![num(p.reach), num(p.f_opt), num(iv.lo), num(iv.hi)])
            .collect::<Vec<_>>()
    });
    table(SFR_HEADER, rows)
}

/// Rows ordered by Π, then frequency.
pub fn map_csv(map: &OverlapMap) -> String {
    let labels: &[f64] = match &map.axis {
        SecondAxis::PiEff(v) | SecondAxis::Reach(v) => v,
    };
    let rows = labels.iter().zip(&map.values).flat_map(|(&label, row)| {
        map.frequencies
            .iter()
            .zip(row)
            .map(move |(&f, &p)| vec![num(f), num(label), num(p)])
    });
    table(MAP_HEADER, rows)
}

pub fn evm_csv(result: &LinkResult) -> String {
    let rows = result
        .evm_per_subcarrier
        .iter()
        .enumerate()
        .map(|(k, &e)| vec![k.to_string(), num(e)]);
    table(EVM_HEADER, rows)
}

/// Failed points keep their row with NaN in the EVM columns.
pub fn summary_csv(outcomes: &[CaseOutcome]) -> String {
    let rows = outcomes.iter().map(|o| {
        let (evm, pen) = match &o.result {
            Ok(r) => (r.evm_avg, r.evm_penalty.unwrap_or(f64::NAN)),
            Err(_) => (f64::NAN, f64::NAN),
        };
        vec![
            o.case.label().to_string(),
            num(o.osrr_db),
            num(o.budget_db),
            num(evm),
            num(pen),
            num(o.lock_fraction),
        ]
    });
    table(SUMMARY_HEADER, rows)
}

pub fn spectrum_csv(spectrum: &[SpectrumPoint]) -> String {
    table(
        SPECTRUM_HEADER,
        spectrum.iter().map(|p| vec![num(p.freq), num(p.power_db)]),
    )
}

pub fn track_csv(track: &[TrackPoint]) -> String {
    table(TRACK_HEADER, track.iter().map(|p| vec![num(p.t), num(p.freq)]))
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sweepguard_core::{FrequencyScan, OdnProfile, OverlapSpec, ReflectionPoint};

    #[test]
    fn plan_rows_repeat_the_common_interval() {
        let odn = OdnProfile::new(
            1.4683,
            vec![
                ReflectionPoint::new(4300.0, -14.0).unwrap(),
                ReflectionPoint::new(7000.0, -14.0).unwrap(),
            ],
        )
        .unwrap();
        let spec = OverlapSpec::from_pi(0.4, 1.55e9).unwrap();
        let scan = FrequencyScan::new(1e3, 50e3, 10.0).unwrap();
        let plan = sweepguard_core::planner::plan_common_sweep(&odn, &spec, 0.0, 1.0 / 32.0, &scan).unwrap();
        let csv = plan_csv(&plan);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(PLAN_HEADER));
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
        let n_sfr: usize = plan.per_fr.iter().map(|p| p.sfr.len()).sum();
        assert_eq!(rows.len(), n_sfr);
        assert!(rows
            .iter()
            .all(|r| r.len() == 8 && r[6] == rows[0][6] && !r[6].is_empty()));
    }

    #[test]
    fn missing_values_are_empty_cells() {
        assert_eq!(opt(None), "");
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(f64::NAN), "NaN");
        assert_eq!(table("a,b", [vec!["1".into(), "".into()]]), "a,b\n1,\n");
    }
}
