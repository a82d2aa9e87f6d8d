//! Spectral displacement between a swept carrier and its reflected replica.
//!
//! A reflection at reach `ℓ` returns the emitted light after the round-trip
//! delay `Δt = 2ℓ·n_g/c`. At time `t` the receiver sees the replica at the
//! frequency the sweep had at `t − Δt`, so the beat with the local oscillator
//! sits at `Δv(t) = ν(t − Δt) − ν(t)`. The reflection overlaps the received
//! signal whenever `|Δv| ≤ f_eff`, where `f_eff` combines the signal band, the
//! crosstalk band and the injection-locking guard.
//!
//! For the ideal sawtooth and `δ = frac(Δt·f)`, `|Δv|` takes only two values
//! over a period: `ΔF·δ` during a fraction `1 − δ` and `ΔF·(1 − δ)` during a
//! fraction `δ`. The worst case is maximized at `δ = 1/2`.

use alloc::vec::Vec;

use crate::error::{ensure, Error, Result};
use crate::interval::{self, Interval};
use crate::waveform::{frac, SweepWaveform};

/// Vacuum speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default number of samples per period for the brute-force evaluator.
pub const DEFAULT_ORACLE_SAMPLES: usize = 65_536;

/// Smallest grid the brute-force evaluator accepts.
pub const MIN_ORACLE_SAMPLES: usize = 1024;

/// A discrete Fresnel reflection in the fiber plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPoint {
    /// Distance from the swept source to the reflecting interface, m.
    pub reach: f64,
    /// Return gain of the interface, dB (≤ 0). Not used by the overlap math.
    pub reflectance_db: f64,
}

impl ReflectionPoint {
    pub fn new(reach: f64, reflectance_db: f64) -> Result<Self> {
        ensure(reach > 0.0 && reach.is_finite(), "reach", reach, "> 0 m")?;
        ensure(reflectance_db <= 0.0, "reflectance", reflectance_db, "<= 0 dB")?;
        Ok(Self { reach, reflectance_db })
    }

    pub fn delay(&self, group_index: f64) -> Result<f64> {
        round_trip_delay(self.reach, group_index)
    }
}

/// Receiver-side bandwidths that a displaced reflection must clear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapSpec {
    /// Uppermost signal frequency `f_u`, Hz.
    pub f_upper: f64,
    /// Injection-locking guard band, Hz. Zero for a free-running receiver.
    pub lock_guard: f64,
    /// Peak sweep deviation `ΔF`, Hz.
    pub delta_f: f64,
    /// Bandwidth of the reflected crosstalk. `None` means the same as `f_upper`.
    pub crosstalk_bandwidth: Option<f64>,
}

impl OverlapSpec {
    pub fn new(f_upper: f64, lock_guard: f64, delta_f: f64) -> Result<Self> {
        let spec = Self {
            f_upper,
            lock_guard,
            delta_f,
            crosstalk_bandwidth: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Spec whose effective band is `pi_eff · delta_f`, with no guard.
    pub fn from_pi(pi_eff: f64, delta_f: f64) -> Result<Self> {
        ensure(pi_eff >= 0.0, "pi_eff", pi_eff, ">= 0")?;
        Self::new(pi_eff * delta_f, 0.0, delta_f)
    }

    pub fn with_crosstalk_bandwidth(mut self, bandwidth: f64) -> Result<Self> {
        self.crosstalk_bandwidth = Some(bandwidth);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.f_upper >= 0.0, "f_upper", self.f_upper, ">= 0 Hz")?;
        ensure(self.lock_guard >= 0.0, "lock_guard", self.lock_guard, ">= 0 Hz")?;
        ensure(
            self.delta_f > 0.0 && self.delta_f.is_finite(),
            "delta_f",
            self.delta_f,
            "> 0 Hz",
        )?;
        if let Some(b) = self.crosstalk_bandwidth {
            ensure(b >= 0.0, "crosstalk_bandwidth", b, ">= 0 Hz")?;
        }
        Ok(())
    }

    /// Smallest displacement that keeps the reflection out of band, Hz.
    pub fn f_eff(&self) -> f64 {
        let xt = self.crosstalk_bandwidth.unwrap_or(self.f_upper);
        0.5 * (self.f_upper + xt) + self.lock_guard
    }

    /// `f_eff / ΔF`. Values of 0.5 and above cannot be cleared by any sweep.
    pub fn pi_eff(&self) -> f64 {
        self.f_eff() / self.delta_f
    }
}

/// Fraction of a sweep period with spectral overlap, plus the range of `|Δv|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapResult {
    pub probability: f64,
    pub min_displacement: f64,
    pub max_displacement: f64,
}

/// Round-trip delay to a reflection at `reach` metres, s.
pub fn round_trip_delay(reach: f64, group_index: f64) -> Result<f64> {
    ensure(reach > 0.0 && reach.is_finite(), "reach", reach, "> 0 m")?;
    ensure(
        group_index > 1.0 && group_index < 2.0,
        "group_index",
        group_index,
        "in (1, 2)",
    )?;
    Ok(2.0 * reach * group_index / SPEED_OF_LIGHT)
}

/// Signed displacement `ν(t − delay) − ν(t)`, Hz. Positive when the reflected
/// carrier sits above the signal carrier.
pub fn displacement(w: &SweepWaveform, delay: f64, t: f64) -> f64 {
    w.instantaneous_frequency(t - delay) - w.instantaneous_frequency(t)
}

/// Closed-form overlap for the ideal sawtooth.
pub fn overlap_probability_analytic(w: &SweepWaveform, delay: f64, spec: &OverlapSpec) -> Result<OverlapResult> {
    if w.ramp_fraction() != 0.0 {
        return Err(Error::RampNotSupported {
            ramp_fraction: w.ramp_fraction(),
        });
    }
    ensure(delay >= 0.0, "delay", delay, ">= 0 s")?;
    let f_eff = spec.f_eff();
    let df = w.delta_f();
    let delta = frac(delay * w.sweep_freq());
    if delta == 0.0 {
        return Ok(OverlapResult {
            probability: if f_eff >= 0.0 { 1.0 } else { 0.0 },
            min_displacement: 0.0,
            max_displacement: 0.0,
        });
    }
    let near = df * delta;
    let far = df * (1.0 - delta);
    let mut probability = 0.0;
    if near <= f_eff {
        probability += 1.0 - delta;
    }
    if far <= f_eff {
        probability += delta;
    }
    Ok(OverlapResult {
        probability,
        min_displacement: near.min(far),
        max_displacement: near.max(far),
    })
}

/// Brute-force overlap on a uniform grid of `n_samples` points per period.
/// Works for any ramp fraction.
pub fn overlap_probability_oracle(
    w: &SweepWaveform,
    delay: f64,
    spec: &OverlapSpec,
    n_samples: usize,
) -> Result<OverlapResult> {
    if n_samples < MIN_ORACLE_SAMPLES {
        return Err(Error::InvalidParameter {
            name: "n_samples",
            value: n_samples as f64,
            expected: ">= 1024",
        });
    }
    ensure(delay >= 0.0, "delay", delay, ">= 0 s")?;
    let f_eff = spec.f_eff();
    let dt = w.period() / n_samples as f64;
    let mut hits = 0usize;
    let mut min_d = f64::INFINITY;
    let mut max_d = 0.0f64;
    for i in 0..n_samples {
        let d = displacement(w, delay, i as f64 * dt).abs();
        if d <= f_eff {
            hits += 1;
        }
        min_d = min_d.min(d);
        max_d = max_d.max(d);
    }
    Ok(OverlapResult {
        probability: hits as f64 / n_samples as f64,
        min_displacement: min_d,
        max_displacement: max_d,
    })
}

/// Overlap probability at sweep frequency `f`: closed form for the ideal
/// sawtooth, brute force otherwise.
pub fn overlap_probability_at(
    delay: f64,
    spec: &OverlapSpec,
    ramp_fraction: f64,
    f: f64,
    n_samples: usize,
) -> Result<f64> {
    let w = SweepWaveform::new(spec.delta_f, f, ramp_fraction, 0.0)?;
    let res = if ramp_fraction == 0.0 {
        overlap_probability_analytic(&w, delay, spec)?
    } else {
        overlap_probability_oracle(&w, delay, spec, n_samples)?
    };
    Ok(res.probability)
}

/// Sweep frequency maximizing the worst-case displacement of the ideal
/// sawtooth: the replica arrives half a period late.
pub fn optimal_sweep_frequency(delay: f64) -> Result<f64> {
    ensure(delay > 0.0 && delay.is_finite(), "delay", delay, "> 0 s")?;
    Ok(0.5 / delay)
}

/// Linear frequency scan used by [`sweep_frequency_range`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyScan {
    pub f_lo: f64,
    pub f_hi: f64,
    pub f_step: f64,
    /// Samples per period when the brute-force evaluator is needed.
    pub oracle_samples: usize,
}

impl FrequencyScan {
    pub fn new(f_lo: f64, f_hi: f64, f_step: f64) -> Result<Self> {
        let scan = Self {
            f_lo,
            f_hi,
            f_step,
            oracle_samples: DEFAULT_ORACLE_SAMPLES,
        };
        scan.validate()?;
        Ok(scan)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.f_lo > 0.0, "f_lo", self.f_lo, "> 0 Hz")?;
        ensure(self.f_hi > self.f_lo, "f_hi", self.f_hi, "> f_lo")?;
        ensure(self.f_step > 0.0, "f_step", self.f_step, "> 0 Hz")?;
        if self.oracle_samples < MIN_ORACLE_SAMPLES {
            return Err(Error::InvalidParameter {
                name: "oracle_samples",
                value: self.oracle_samples as f64,
                expected: ">= 1024",
            });
        }
        Ok(())
    }

    /// Grid points `f_lo, f_lo + step, …`, ending exactly at `f_hi`.
    pub fn points(&self) -> Vec<f64> {
        let n = libm::floor((self.f_hi - self.f_lo) / self.f_step) as usize;
        let mut pts: Vec<f64> = (0..=n).map(|k| self.f_lo + k as f64 * self.f_step).collect();
        if pts.last().is_some_and(|&f| f < self.f_hi) {
            pts.push(self.f_hi);
        }
        pts
    }

    /// Endpoint resolution after bisection.
    pub fn tolerance(&self) -> f64 {
        self.f_step / 100.0
    }
}

/// Maximal sweep-frequency intervals over the scan whose overlap probability
/// stays at or below `threshold`. An empty list means no compatible frequency.
pub fn sweep_frequency_range(
    delay: f64,
    spec: &OverlapSpec,
    ramp_fraction: f64,
    threshold: f64,
    scan: &FrequencyScan,
) -> Result<Vec<Interval>> {
    ensure(delay > 0.0, "delay", delay, "> 0 s")?;
    ensure((0.0..=1.0).contains(&threshold), "threshold", threshold, "in [0, 1]")?;
    scan.validate()?;
    spec.validate()?;
    let ok = |f: f64| -> Result<bool> {
        Ok(overlap_probability_at(delay, spec, ramp_fraction, f, scan.oracle_samples)? <= threshold)
    };
    let tol = scan.tolerance();
    // bisect between a compatible and an incompatible frequency
    let refine = |mut good: f64, mut bad: f64| -> Result<f64> {
        while (good - bad).abs() > tol {
            let mid = 0.5 * (good + bad);
            if ok(mid)? {
                good = mid;
            } else {
                bad = mid;
            }
        }
        Ok(0.5 * (good + bad))
    };

    let pts = scan.points();
    let flags = pts.iter().map(|&f| ok(f)).collect::<Result<Vec<bool>>>()?;
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    for k in 0..pts.len() {
        match (flags[k], start) {
            (true, None) => {
                start = Some(if k == 0 { pts[0] } else { refine(pts[k], pts[k - 1])? });
            }
            (false, Some(lo)) => {
                let hi = refine(pts[k - 1], pts[k])?;
                out.push(Interval::new(lo, hi));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(lo) = start {
        out.push(Interval::new(lo, scan.f_hi));
    }
    Ok(interval::normalize(out, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    const N_G: f64 = 1.4683;

    fn sawtooth_at_delta(delta: f64, df: f64) -> (SweepWaveform, f64) {
        let w = SweepWaveform::sawtooth(df, 1e4).unwrap();
        (w, delta * w.period())
    }

    #[test]
    fn delay_arithmetic() {
        let d = round_trip_delay(4300.0, N_G).unwrap();
        assert!((d - 42.12e-6).abs() < 0.01e-6, "{d}");
        let d = round_trip_delay(7000.0, N_G).unwrap();
        assert!((d - 68.57e-6).abs() < 0.01e-6, "{d}");
        let d = round_trip_delay(1e-9, N_G).unwrap();
        assert!(d < 1e-17);
    }

    #[test]
    fn delay_rejects_bad_inputs() {
        assert!(round_trip_delay(0.0, N_G).is_err());
        assert!(round_trip_delay(-5.0, N_G).is_err());
        assert!(round_trip_delay(100.0, 1.0).is_err());
        assert!(round_trip_delay(100.0, 2.5).is_err());
    }

    #[test]
    fn displacement_examples() {
        let w = SweepWaveform::sawtooth(1e9, 1e4).unwrap();
        let t_per = w.period();
        assert_eq!(displacement(&w, 0.0, 3.7e-5), 0.0);
        // t on the rising ramp, at least half a period past the wrap
        let d = displacement(&w, t_per / 2.0, 0.7 * t_per);
        assert!((d.abs() - 0.5e9).abs() < 1.0, "{d}");
        let d = displacement(&w, t_per / 2.0, 0.2 * t_per);
        assert!((d.abs() - 0.5e9).abs() < 1.0, "{d}");
        let d = displacement(&w, t_per, 0.37 * t_per);
        assert!(d.abs() < 1e-3, "{d}");
    }

    #[test]
    fn analytic_examples() {
        let df = 1e9;
        let (w, delay) = sawtooth_at_delta(0.5, df);
        let spec = OverlapSpec::from_pi(0.4, df).unwrap();
        assert_eq!(overlap_probability_analytic(&w, delay, &spec).unwrap().probability, 0.0);

        let (w, delay) = sawtooth_at_delta(0.2, df);
        let res = overlap_probability_analytic(&w, delay, &spec).unwrap();
        assert!((res.probability - 0.8).abs() < 1e-12);
        assert!((res.min_displacement - 0.2e9).abs() < 1.0);
        assert!((res.max_displacement - 0.8e9).abs() < 1.0);
    }

    #[test]
    fn analytic_rejects_ramp() {
        let w = SweepWaveform::new(1e9, 1e4, 0.1, 0.0).unwrap();
        let spec = OverlapSpec::from_pi(0.2, 1e9).unwrap();
        assert!(matches!(
            overlap_probability_analytic(&w, 1e-5, &spec),
            Err(Error::RampNotSupported { .. })
        ));
    }

    #[test]
    fn zero_delay_overlaps_everywhere() {
        let w = SweepWaveform::new(1e9, 1e4, 0.05, 0.0).unwrap();
        let spec = OverlapSpec::new(1e6, 0.0, 1e9).unwrap();
        let res = overlap_probability_oracle(&w, 0.0, &spec, 4096).unwrap();
        assert_eq!(res.probability, 1.0);
        assert_eq!(res.max_displacement, 0.0);
    }

    #[test]
    fn oracle_rejects_coarse_grid() {
        let w = SweepWaveform::sawtooth(1e9, 1e4).unwrap();
        let spec = OverlapSpec::from_pi(0.2, 1e9).unwrap();
        assert!(overlap_probability_oracle(&w, 1e-5, &spec, 1000).is_err());
    }

    #[test]
    fn oracle_matches_closed_form_on_fixed_cases() {
        let df = 1.55e9;
        for &(delta, pi) in &[(0.5, 0.4), (0.2, 0.4), (0.9, 0.3), (0.35, 0.1), (0.05, 0.6)] {
            let (w, delay) = sawtooth_at_delta(delta, df);
            let spec = OverlapSpec::from_pi(pi, df).unwrap();
            let a = overlap_probability_analytic(&w, delay, &spec).unwrap();
            let o = overlap_probability_oracle(&w, delay, &spec, 65_536).unwrap();
            assert!(
                (a.probability - o.probability).abs() <= 2.0 / 65_536.0,
                "δ={delta} Π={pi}: {a:?} vs {o:?}"
            );
        }
    }

    #[test]
    fn optimal_frequency() {
        assert!((optimal_sweep_frequency(50e-6).unwrap() - 1e4).abs() < 1e-9);
        assert!(optimal_sweep_frequency(0.0).is_err());
    }

    #[test]
    fn f_eff_combines_bands() {
        let spec = OverlapSpec::new(125e6, 200e6, 1.55e9).unwrap();
        assert_eq!(spec.f_eff(), 325e6);
        let spec = spec.with_crosstalk_bandwidth(25e6).unwrap();
        assert_eq!(spec.f_eff(), 275e6);
        assert!(OverlapSpec::new(-1.0, 0.0, 1e9).is_err());
    }

    #[test]
    fn total_overlap_gives_empty_range() {
        let delay = round_trip_delay(4300.0, N_G).unwrap();
        let spec = OverlapSpec::from_pi(0.5, 1.55e9).unwrap();
        let scan = FrequencyScan::new(1e3, 40e3, 10.0).unwrap();
        let sfr = sweep_frequency_range(delay, &spec, 0.0, 1.0 / 32.0, &scan).unwrap();
        assert!(sfr.is_empty(), "{sfr:?}");
    }

    #[test]
    fn scan_points_end_on_upper_bound() {
        let scan = FrequencyScan::new(1.0, 2.05, 0.1).unwrap();
        let pts = scan.points();
        assert_eq!(*pts.last().unwrap(), 2.05);
        assert_eq!(pts[0], 1.0);
    }
}
