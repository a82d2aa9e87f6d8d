//! Periodic optical-frequency sweep shared by transmitter and local oscillator.
//!
//! One period consists of a linear rising ramp from 0 to `delta_f` followed by
//! a linear falling ramp back to 0 that occupies `ramp_fraction` of the period.
//! With `ramp_fraction == 0` the waveform is the ideal sawtooth. Frequencies
//! are offsets from the unswept emission frequency.

use crate::error::{ensure, Error, Result};

/// A periodic sweep of the optical emission frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepWaveform {
    delta_f: f64,
    sweep_freq: f64,
    ramp_fraction: f64,
    phase_offset: f64,
}

impl SweepWaveform {
    /// Builds a waveform after checking every parameter range.
    pub fn new(delta_f: f64, sweep_freq: f64, ramp_fraction: f64, phase_offset: f64) -> Result<Self> {
        ensure(delta_f > 0.0 && delta_f.is_finite(), "delta_f", delta_f, "> 0 Hz")?;
        ensure(
            sweep_freq > 0.0 && sweep_freq.is_finite(),
            "sweep_freq",
            sweep_freq,
            "> 0 Hz",
        )?;
        ensure(
            (0.0..0.5).contains(&ramp_fraction),
            "ramp_fraction",
            ramp_fraction,
            "in [0, 0.5)",
        )?;
        ensure(
            (0.0..1.0).contains(&phase_offset),
            "phase_offset",
            phase_offset,
            "in [0, 1)",
        )?;
        Ok(Self {
            delta_f,
            sweep_freq,
            ramp_fraction,
            phase_offset,
        })
    }

    /// Ideal sawtooth starting at the beginning of its ramp.
    pub fn sawtooth(delta_f: f64, sweep_freq: f64) -> Result<Self> {
        Self::new(delta_f, sweep_freq, 0.0, 0.0)
    }

    pub fn delta_f(&self) -> f64 {
        self.delta_f
    }

    pub fn sweep_freq(&self) -> f64 {
        self.sweep_freq
    }

    pub fn period(&self) -> f64 {
        1.0 / self.sweep_freq
    }

    pub fn ramp_fraction(&self) -> f64 {
        self.ramp_fraction
    }

    pub fn phase_offset(&self) -> f64 {
        self.phase_offset
    }

    /// Same waveform with another sweep frequency.
    pub fn with_sweep_freq(&self, sweep_freq: f64) -> Result<Self> {
        Self::new(self.delta_f, sweep_freq, self.ramp_fraction, self.phase_offset)
    }

    /// Same waveform with another peak deviation.
    pub fn with_delta_f(&self, delta_f: f64) -> Result<Self> {
        Self::new(delta_f, self.sweep_freq, self.ramp_fraction, self.phase_offset)
    }

    /// Same waveform started at another fraction of its period. Any real
    /// offset is accepted and wrapped into `[0, 1)`.
    pub fn with_phase_offset(&self, phase_offset: f64) -> Result<Self> {
        let wrapped = frac(phase_offset);
        Self::new(self.delta_f, self.sweep_freq, self.ramp_fraction, wrapped)
    }

    /// Position within the period, in `[0, 1)`, at time `t`.
    pub fn period_fraction(&self, t: f64) -> f64 {
        frac(t * self.sweep_freq + self.phase_offset)
    }

    /// Frequency offset at period fraction `p` in `[0, 1)`.
    pub fn frequency_at_fraction(&self, p: f64) -> f64 {
        let rise = 1.0 - self.ramp_fraction;
        if p < rise {
            self.delta_f * p / rise
        } else {
            self.delta_f * (1.0 - p) / self.ramp_fraction
        }
    }

    /// Instantaneous frequency offset in Hz at time `t` (any real `t`).
    pub fn instantaneous_frequency(&self, t: f64) -> f64 {
        self.frequency_at_fraction(self.period_fraction(t))
    }

    /// Phase in cycles accumulated since the sweep origin (`t * f + offset == 0`).
    ///
    /// Differences of this value give the phase accumulated between two times.
    pub fn phase_since_origin(&self, t: f64) -> f64 {
        let u = t * self.sweep_freq + self.phase_offset;
        let whole = libm::floor(u);
        let area = 0.5 * whole + self.area_to_fraction(u - whole);
        self.delta_f * self.period() * area
    }

    /// Integral of the instantaneous frequency over `[t0, t1]`, in cycles.
    pub fn accumulated_phase(&self, t0: f64, t1: f64) -> Result<f64> {
        if t1.is_nan() || t0.is_nan() || t1 < t0 {
            return Err(Error::ReversedInterval { t0, t1 });
        }
        let u0 = t0 * self.sweep_freq + self.phase_offset;
        let u1 = t1 * self.sweep_freq + self.phase_offset;
        let (w0, w1) = (libm::floor(u0), libm::floor(u1));
        let area = 0.5 * (w1 - w0) + self.area_to_fraction(u1 - w1) - self.area_to_fraction(u0 - w0);
        Ok(self.delta_f * self.period() * area)
    }

    /// Area under the normalized waveform (peak 1, period 1) from 0 to `p`.
    fn area_to_fraction(&self, p: f64) -> f64 {
        let rise = 1.0 - self.ramp_fraction;
        if p < rise {
            p * p / (2.0 * rise)
        } else {
            let r = self.ramp_fraction;
            let tail = 1.0 - p;
            0.5 * rise + (r * r - tail * tail) / (2.0 * r)
        }
    }
}

/// Fractional part in `[0, 1)` for any finite input.
pub(crate) fn frac(x: f64) -> f64 {
    let f = x - libm::floor(x);
    // floor rounding can land exactly on 1.0 for tiny negative inputs
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DF: f64 = 1.55e9;
    const F: f64 = 12.1e3;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sawtooth_start_and_midpoint() {
        let w = SweepWaveform::sawtooth(DF, F).unwrap();
        assert_eq!(w.instantaneous_frequency(0.0), 0.0);
        let mid = w.instantaneous_frequency(0.5 / F);
        assert!(close(mid, 0.775e9, 1e-3), "{mid}");
    }

    #[test]
    fn falling_ramp_midpoint() {
        let r = 1.0 / 32.0;
        let w = SweepWaveform::new(DF, F, r, 0.0).unwrap();
        let p = 1.0 - 1.0 / 64.0;
        // direct two-ramp evaluation: falling branch ΔF·(1−p)/r
        let direct = DF * (1.0 - p) / r;
        assert!(close(direct, 0.775e9, 1e-3));
        assert!(close(w.frequency_at_fraction(p), direct, 1e-3));
        assert!(close(w.instantaneous_frequency(p / F), 0.775e9, 10.0));
    }

    #[test]
    fn falling_ramp_is_continuous_at_the_peak() {
        let w = SweepWaveform::new(DF, F, 0.1, 0.0).unwrap();
        let below = w.frequency_at_fraction(0.9 - 1e-12);
        let at = w.frequency_at_fraction(0.9);
        assert!(close(below, DF, 1.0) && close(at, DF, 1.0));
    }

    #[test]
    fn one_period_of_area() {
        let w = SweepWaveform::sawtooth(1e9, 1e4).unwrap();
        let cycles = w.accumulated_phase(0.0, 1e-4).unwrap();
        assert!(close(cycles, 5e4, 1e-6), "{cycles}");

        let w = SweepWaveform::new(DF, F, 1.0 / 32.0, 0.3).unwrap();
        let cycles = w.accumulated_phase(2.5e-6, 2.5e-6 + 1.0 / F).unwrap();
        assert!(close(cycles, DF / F / 2.0, 1e-6), "{cycles}");
    }

    #[test]
    fn empty_interval_has_no_phase() {
        let w = SweepWaveform::new(DF, F, 0.2, 0.4).unwrap();
        assert_eq!(w.accumulated_phase(3.3e-5, 3.3e-5).unwrap(), 0.0);
    }

    #[test]
    fn reversed_interval_is_rejected() {
        let w = SweepWaveform::sawtooth(DF, F).unwrap();
        assert!(matches!(
            w.accumulated_phase(1.0, 0.5),
            Err(Error::ReversedInterval { .. })
        ));
    }

    #[test]
    fn constructor_rejects_out_of_range() {
        assert!(SweepWaveform::new(0.0, F, 0.0, 0.0).is_err());
        assert!(SweepWaveform::new(DF, -1.0, 0.0, 0.0).is_err());
        assert!(SweepWaveform::new(DF, F, 0.5, 0.0).is_err());
        assert!(SweepWaveform::new(DF, F, 0.0, 1.0).is_err());
        assert!(SweepWaveform::new(f64::NAN, F, 0.0, 0.0).is_err());
    }

    #[test]
    fn frac_of_negative_inputs() {
        assert_eq!(frac(-0.25), 0.75);
        assert_eq!(frac(-1e-20), 0.0);
        assert_eq!(frac(3.0), 0.0);
    }
}
