//! Common sweep frequency for a network with several reflections.
//!
//! Each reflection admits its own set of compatible sweep frequencies. A
//! frequency usable for the whole network must lie in all of them, and the
//! planner picks the midpoint of the widest such interval.

use alloc::vec::Vec;

use crate::error::{ensure, Error, Result};
use crate::interval::{self, Interval};
use crate::overlap::{
    optimal_sweep_frequency, overlap_probability_at, overlap_probability_oracle, sweep_frequency_range, FrequencyScan,
    OverlapSpec, ReflectionPoint,
};
use crate::waveform::SweepWaveform;

/// The optical distribution network seen from the swept transceiver.
#[derive(Debug, Clone, PartialEq)]
pub struct OdnProfile {
    pub group_index: f64,
    pub reflections: Vec<ReflectionPoint>,
    /// Total fiber length, m.
    pub feeder_length: f64,
    /// Loss on top of the fiber attenuation, dB.
    pub excess_loss_db: f64,
}

impl OdnProfile {
    pub fn new(group_index: f64, reflections: Vec<ReflectionPoint>) -> Result<Self> {
        let odn = Self {
            group_index,
            reflections,
            feeder_length: 0.0,
            excess_loss_db: 0.0,
        };
        odn.validate()?;
        Ok(odn)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            self.group_index > 1.0 && self.group_index < 2.0,
            "group_index",
            self.group_index,
            "in (1, 2)",
        )?;
        ensure(self.feeder_length >= 0.0, "feeder_length", self.feeder_length, ">= 0 m")?;
        ensure(
            self.excess_loss_db >= 0.0,
            "excess_loss",
            self.excess_loss_db,
            ">= 0 dB",
        )?;
        for r in &self.reflections {
            ReflectionPoint::new(r.reach, r.reflectance_db)?;
        }
        Ok(())
    }

    /// Round-trip delays of all reflections, in list order.
    pub fn delays(&self) -> Result<Vec<f64>> {
        self.reflections.iter().map(|r| r.delay(self.group_index)).collect()
    }
}

/// Compatible frequencies for one reflection.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionPlan {
    pub reach: f64,
    pub delay: f64,
    pub f_opt: f64,
    pub sfr: Vec<Interval>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanStatus {
    Compatible,
    NoCompatibleFrequency,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub per_fr: Vec<ReflectionPlan>,
    pub common_intervals: Vec<Interval>,
    /// The common sweep frequency κ, if any exists.
    pub chosen_frequency: Option<f64>,
    /// Largest overlap probability across reflections at κ.
    pub worst_overlap: Option<f64>,
    /// Highest per-reflection optimum; closer reflections push this up.
    pub max_required_frequency: f64,
    pub spec_used: OverlapSpec,
    pub ramp_fraction: f64,
    pub threshold: f64,
    pub status: PlanStatus,
}

impl SweepPlan {
    /// The common interval holding κ.
    pub fn chosen_interval(&self) -> Option<Interval> {
        let k = self.chosen_frequency?;
        self.common_intervals.iter().copied().find(|iv| iv.contains(k))
    }
}

/// `signal_bandwidth + lock_guard`: the band a displaced reflection must clear.
pub fn effective_upper_frequency(signal_bandwidth: f64, lock_guard: f64) -> Result<f64> {
    ensure(signal_bandwidth >= 0.0, "signal_bandwidth", signal_bandwidth, ">= 0 Hz")?;
    ensure(lock_guard >= 0.0, "lock_guard", lock_guard, ">= 0 Hz")?;
    Ok(signal_bandwidth + lock_guard)
}

/// Intersects the per-reflection compatible ranges and picks κ.
pub fn plan_common_sweep(
    odn: &OdnProfile,
    spec: &OverlapSpec,
    ramp_fraction: f64,
    threshold: f64,
    scan: &FrequencyScan,
) -> Result<SweepPlan> {
    if odn.reflections.is_empty() {
        return Err(Error::NoReflections);
    }
    odn.validate()?;
    let tol = scan.tolerance();

    let mut per_fr = Vec::with_capacity(odn.reflections.len());
    for r in &odn.reflections {
        let delay = r.delay(odn.group_index)?;
        per_fr.push(ReflectionPlan {
            reach: r.reach,
            delay,
            f_opt: optimal_sweep_frequency(delay)?,
            sfr: sweep_frequency_range(delay, spec, ramp_fraction, threshold, scan)?,
        });
    }

    let mut common = per_fr[0].sfr.clone();
    for p in &per_fr[1..] {
        common = interval::intersect_lists(&common, &p.sfr, tol);
    }

    let chosen_frequency = widest(&common).map(|iv| iv.midpoint());

    let worst_overlap = match chosen_frequency {
        Some(k) => {
            let w = SweepWaveform::new(spec.delta_f, k, ramp_fraction, 0.0)?;
            let mut worst = 0.0f64;
            for p in &per_fr {
                let res = overlap_probability_oracle(&w, p.delay, spec, scan.oracle_samples)?;
                worst = worst.max(res.probability);
            }
            Some(worst)
        }
        None => None,
    };

    let max_required_frequency = per_fr.iter().map(|p| p.f_opt).fold(0.0, f64::max);
    Ok(SweepPlan {
        per_fr,
        common_intervals: common,
        status: if chosen_frequency.is_some() {
            PlanStatus::Compatible
        } else {
            PlanStatus::NoCompatibleFrequency
        },
        chosen_frequency,
        worst_overlap,
        max_required_frequency,
        spec_used: *spec,
        ramp_fraction,
        threshold,
    })
}

/// Widest interval of a sorted list; the lowest one wins ties.
fn widest(list: &[Interval]) -> Option<Interval> {
    let mut best: Option<Interval> = None;
    for iv in list {
        if best.is_none_or(|b| iv.width() > b.width()) {
            best = Some(*iv);
        }
    }
    best
}

/// What the rows of an [`OverlapMap`] vary.
#[derive(Debug, Clone, PartialEq)]
pub enum SecondAxis {
    /// Effective Π per row; every reflection of the network is evaluated and
    /// the worst case kept.
    PiEff(Vec<f64>),
    /// Reach per row, m, with the base spec.
    Reach(Vec<f64>),
}

impl SecondAxis {
    pub fn len(&self) -> usize {
        match self {
            SecondAxis::PiEff(v) | SecondAxis::Reach(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Overlap probability over a sweep-frequency grid and a second axis.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMap {
    pub frequencies: Vec<f64>,
    pub axis: SecondAxis,
    /// `values[row][col]`: row indexes the second axis, col the frequency.
    pub values: Vec<Vec<f64>>,
}

pub fn overlap_map(
    odn: &OdnProfile,
    base: &OverlapSpec,
    axis: SecondAxis,
    frequencies: &[f64],
    ramp_fraction: f64,
    oracle_samples: usize,
) -> Result<OverlapMap> {
    if frequencies.is_empty() {
        return Err(Error::EmptyGrid("frequency"));
    }
    if axis.is_empty() {
        return Err(Error::EmptyGrid("second axis"));
    }
    let mut values = Vec::with_capacity(axis.len());
    match &axis {
        SecondAxis::PiEff(pis) => {
            if odn.reflections.is_empty() {
                return Err(Error::NoReflections);
            }
            let delays = odn.delays()?;
            for &pi in pis {
                let spec = OverlapSpec::from_pi(pi, base.delta_f)?;
                let row = frequencies
                    .iter()
                    .map(|&f| {
                        delays.iter().try_fold(0.0f64, |acc, &d| {
                            Ok(acc.max(overlap_probability_at(d, &spec, ramp_fraction, f, oracle_samples)?))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                values.push(row);
            }
        }
        SecondAxis::Reach(reaches) => {
            for &reach in reaches {
                let delay = ReflectionPoint::new(reach, 0.0)?.delay(odn.group_index)?;
                let row = frequencies
                    .iter()
                    .map(|&f| overlap_probability_at(delay, base, ramp_fraction, f, oracle_samples))
                    .collect::<Result<Vec<f64>>>()?;
                values.push(row);
            }
        }
    }
    Ok(OverlapMap {
        frequencies: frequencies.to_vec(),
        axis,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const DF: f64 = 1.55e9;

    fn odn(reaches: &[f64]) -> OdnProfile {
        let refl = reaches
            .iter()
            .map(|&r| ReflectionPoint::new(r, -14.7).unwrap())
            .collect();
        OdnProfile::new(1.4683, refl).unwrap()
    }

    #[test]
    fn effective_pi_values() {
        let pi = effective_upper_frequency(125e6, 0.0).unwrap() / DF;
        assert!((pi - 0.0806).abs() < 1e-4);
        let pi = effective_upper_frequency(125e6, 200e6).unwrap() / DF;
        assert!((pi - 0.2097).abs() < 1e-4);
        assert_eq!(effective_upper_frequency(0.0, 100e6).unwrap(), 100e6);
        assert!(effective_upper_frequency(-1.0, 0.0).is_err());
    }

    #[test]
    fn empty_network_is_rejected() {
        let odn = OdnProfile::new(1.4683, vec![]).unwrap();
        let spec = OverlapSpec::from_pi(0.4, DF).unwrap();
        let scan = FrequencyScan::new(1e3, 20e3, 10.0).unwrap();
        assert_eq!(
            plan_common_sweep(&odn, &spec, 0.0, 1.0 / 32.0, &scan),
            Err(Error::NoReflections)
        );
    }

    #[test]
    fn total_overlap_has_no_kappa() {
        let spec = OverlapSpec::from_pi(0.5, DF).unwrap();
        let scan = FrequencyScan::new(1e3, 20e3, 10.0).unwrap();
        let plan = plan_common_sweep(&odn(&[4300.0]), &spec, 0.0, 1.0 / 32.0, &scan).unwrap();
        assert_eq!(plan.status, PlanStatus::NoCompatibleFrequency);
        assert!(plan.chosen_frequency.is_none() && plan.worst_overlap.is_none());
    }

    #[test]
    fn single_reflection_kappa_is_the_optimum() {
        let spec = OverlapSpec::from_pi(0.4, DF).unwrap();
        let scan = FrequencyScan::new(1e3, 20e3, 10.0).unwrap();
        let plan = plan_common_sweep(&odn(&[4300.0]), &spec, 0.0, 1.0 / 32.0, &scan).unwrap();
        let k = plan.chosen_frequency.unwrap();
        assert!((k - plan.per_fr[0].f_opt).abs() < 1.0, "{k}");
        assert_eq!(plan.worst_overlap, Some(0.0));
        assert_eq!(plan.max_required_frequency, plan.per_fr[0].f_opt);
    }

    #[test]
    fn tie_break_prefers_lowest_interval() {
        let common = [Interval::new(1.0, 2.0), Interval::new(5.0, 6.0)];
        assert_eq!(widest(&common), Some(common[0]));
        let common = [Interval::new(1.0, 2.0), Interval::new(5.0, 6.5)];
        assert_eq!(widest(&common), Some(common[1]));
        assert_eq!(widest(&[]), None);
    }

    #[test]
    fn map_shapes_and_bad_grids() {
        let spec = OverlapSpec::from_pi(0.4, DF).unwrap();
        let fs = [5e3, 10e3, 12e3];
        let map = overlap_map(
            &odn(&[4300.0]),
            &spec,
            SecondAxis::PiEff(vec![0.0, 0.4]),
            &fs,
            0.0,
            4096,
        )
        .unwrap();
        assert_eq!(map.values.len(), 2);
        assert!(map.values.iter().all(|row| row.len() == 3));
        assert!(map.values[0].iter().all(|&v| v == 0.0));
        assert!(overlap_map(&odn(&[4300.0]), &spec, SecondAxis::PiEff(vec![]), &fs, 0.0, 4096).is_err());
        assert!(overlap_map(&odn(&[4300.0]), &spec, SecondAxis::Reach(vec![1.0]), &[], 0.0, 4096).is_err());
    }
}
