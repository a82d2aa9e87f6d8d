use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{ensure, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub freq: f64,
    pub power_db: f64,
}

/// Peak frequency of one short-time frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    /// Frame centre, s.
    pub t: f64,
    pub freq: f64,
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

fn check(x: &[f64], fs: f64, nfft: usize) -> Result<()> {
    ensure(
        nfft >= 8 && nfft.is_power_of_two(),
        "nfft",
        nfft as f64,
        "a power of two >= 8",
    )?;
    ensure(fs > 0.0, "sample_rate", fs, "> 0 Hz")?;
    ensure(
        x.len() >= nfft,
        "record length",
        x.len() as f64,
        &format!(">= nfft = {nfft}"),
    )
}

/// One-sided power spectral density by Welch averaging (Hann window, half
/// overlap), in dB relative to 1 mW²/Hz.
pub fn welch_psd(x: &[f64], fs: f64, nfft: usize) -> Result<Vec<SpectrumPoint>> {
    check(x, fs, nfft)?;
    let w = hann(nfft);
    let norm = fs * w.iter().map(|v| v * v).sum::<f64>();
    let fft = FftPlanner::new().plan_fft_forward(nfft);
    let hop = nfft / 2;
    let mut acc = vec![0.0; nfft / 2 + 1];
    let mut frames = 0usize;
    let mut buf = vec![Complex64::default(); nfft];
    let mut start = 0;
    while start + nfft <= x.len() {
        for (b, (&v, &wi)) in buf.iter_mut().zip(x[start..].iter().zip(&w)) {
            *b = Complex64::new(v * wi, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        frames += 1;
        start += hop;
    }
    Ok(acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = if k == 0 || k == nfft / 2 { 1.0 } else { 2.0 };
            let psd = one_sided * p / (frames as f64 * norm);
            SpectrumPoint {
                freq: k as f64 * fs / nfft as f64,
                power_db: 10.0 * psd.max(1e-300).log10(),
            }
        })
        .collect())
}

/// Strongest spectral line in consecutive, non-overlapping frames, refined by
/// a parabola through the log power of the peak bin and its neighbours.
pub fn peak_track(x: &[f64], fs: f64, nfft: usize) -> Result<Vec<TrackPoint>> {
    check(x, fs, nfft)?;
    let w = hann(nfft);
    let fft = FftPlanner::new().plan_fft_forward(nfft);
    let mut buf = vec![Complex64::default(); nfft];
    let mut out = Vec::with_capacity(x.len() / nfft);
    for (f, frame) in x.chunks_exact(nfft).enumerate() {
        for (b, (&v, &wi)) in buf.iter_mut().zip(frame.iter().zip(&w)) {
            *b = Complex64::new(v * wi, 0.0);
        }
        fft.process(&mut buf);
        let power: Vec<f64> = buf[..=nfft / 2].iter().map(|c| c.norm_sqr().max(1e-300)).collect();
        let k = (1..nfft / 2)
            .max_by(|&a, &b| power[a].total_cmp(&power[b]))
            .expect("nfft >= 8");
        let (a, b, c) = (power[k - 1].ln(), power[k].ln(), power[k + 1].ln());
        let den = a - 2.0 * b + c;
        let shift = if den < 0.0 { 0.5 * (a - c) / den } else { 0.0 };
        out.push(TrackPoint {
            t: (f * nfft) as f64 / fs + 0.5 * nfft as f64 / fs,
            freq: (k as f64 + shift) * fs / nfft as f64,
        });
    }
    Ok(out)
}

/// Frequency of the strongest point in `[f_lo, f_hi]`.
pub fn peak_in(spectrum: &[SpectrumPoint], f_lo: f64, f_hi: f64) -> Option<SpectrumPoint> {
    spectrum
        .iter()
        .filter(|p| p.freq >= f_lo && p.freq <= f_hi)
        .copied()
        .max_by(|a, b| a.power_db.total_cmp(&b.power_db))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(f: f64, fs: f64, amp: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| amp * (2.0 * PI * f * i as f64 / fs).cos()).collect()
    }

    #[test]
    fn welch_integrates_to_signal_power() {
        let fs = 1e6;
        let x = tone(123_456.0, fs, 2.0, 1 << 16);
        let s = welch_psd(&x, fs, 1024).unwrap();
        let df = fs / 1024.0;
        let total: f64 = s.iter().map(|p| 10f64.powf(p.power_db / 10.0) * df).sum();
        assert!((total - 2.0).abs() / 2.0 < 0.01, "{total}");
        let pk = peak_in(&s, 0.0, fs / 2.0).unwrap();
        assert!((pk.freq - 123_456.0).abs() <= df);
    }

    #[test]
    fn welch_of_white_noise_is_flat_at_its_density() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let fs = 1e3;
        let sigma = 0.5f64;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let normal = Normal::new(0.0, sigma).unwrap();
        let x: Vec<f64> = (0..1 << 18).map(|_| normal.sample(&mut rng)).collect();
        let s = welch_psd(&x, fs, 256).unwrap();
        let expect = 10.0 * (2.0 * sigma * sigma / fs).log10();
        let mean = s[1..128].iter().map(|p| p.power_db).sum::<f64>() / 127.0;
        assert!((mean - expect).abs() < 0.1, "{mean} vs {expect}");
    }

    #[test]
    fn track_follows_a_stepped_tone_to_a_fraction_of_a_bin() {
        let fs = 1e6;
        let nfft = 256;
        let mut x = tone(100_300.0, fs, 1.0, nfft * 4);
        x.extend(tone(200_700.0, fs, 1.0, nfft * 4));
        let tr = peak_track(&x, fs, nfft).unwrap();
        assert_eq!(tr.len(), 8);
        let bin = fs / nfft as f64;
        for p in &tr[..4] {
            assert!((p.freq - 100_300.0).abs() < 0.1 * bin, "{}", p.freq);
        }
        for p in &tr[4..] {
            assert!((p.freq - 200_700.0).abs() < 0.1 * bin, "{}", p.freq);
        }
        assert!((tr[0].t - 128e-6).abs() < 1e-12);
    }

    #[test]
    fn short_records_are_rejected() {
        assert!(welch_psd(&[0.0; 10], 1.0, 16).is_err());
        assert!(peak_track(&[0.0; 100], 1.0, 12).is_err());
    }
}
