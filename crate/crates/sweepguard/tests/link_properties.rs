use num_complex::Complex64;
use proptest::prelude::*;
use sweepguard::link::field::{Link, LoEmission};
use sweepguard::link::ofdm::OfdmConfig;
use sweepguard::link::spectrum::peak_track;
use sweepguard::link::{run_link_experiment, Case, ScanAxis, Scenario};
use sweepguard_core::overlap::displacement;
use sweepguard_core::{OdnProfile, ReflectionPoint, SweepWaveform};

fn scenario(sweep_freq: f64) -> Scenario {
    let odn = OdnProfile::new(1.4683, vec![ReflectionPoint::new(4300.0, -14.0).unwrap()]).unwrap();
    let mut sc = Scenario::new(odn, SweepWaveform::sawtooth(1.55e9, sweep_freq).unwrap());
    sc.calibrate_noise(&OfdmConfig::default(), -24.4, 12.5);
    sc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn reflected_to_signal_power_follows_osrr(osrr in -5.0f64..20.0, seed in 0u64..1000) {
        let mut sc = scenario(12e3);
        sc.osrr_db = osrr;
        sc.seed = seed;
        let n = 100_000;
        let link = Link::prepare(&sc, n).unwrap();
        let env: Vec<Complex64> = (0..n).map(|i| Complex64::cis(0.37 * i as f64)).collect();
        let locked = LoEmission { deviation: vec![0.0; link.history + n], locked: vec![true; link.history + n] };
        let rx = link.propagate(&env, sc.carrier_fraction(), &locked);
        let p = |v: &[Complex64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>();
        let ratio_db = 10.0 * (p(&rx.signal) / p(&rx.reflection)).log10();
        prop_assert!((ratio_db - osrr).abs() < 0.01, "{} vs {}", ratio_db, osrr);
    }
}

#[test]
fn reflection_beat_tracks_the_analytic_displacement() {
    // δ = 0.3 gives two distinct displacement levels, 0.3·ΔF and 0.7·ΔF
    let mut sc = scenario(12e3);
    let delay = sc.odn.delays().unwrap()[0];
    sc.sweep = SweepWaveform::sawtooth(1.55e9, 0.3 / delay).unwrap();
    sc.osrr_db = 0.0;
    sc.linewidth = 0.0;
    sc.noise_density = 0.0;
    let n = (sc.period() * sc.sample_rate) as usize;
    let link = Link::prepare(&sc, n).unwrap();
    let det = link.run(&vec![Complex64::default(); n], 1.0);
    let nfft = 512;
    let bin = sc.sample_rate / nfft as f64;
    let track = peak_track(&det.rf, sc.sample_rate, nfft).unwrap();
    let mut checked = 0;
    for p in &track {
        let t0 = p.t - 0.5 * nfft as f64 / sc.sample_rate;
        let t1 = t0 + nfft as f64 / sc.sample_rate;
        let (a, b) = (displacement(&sc.sweep, delay, t0), displacement(&sc.sweep, delay, t1));
        if (a - b).abs() > 1.0 {
            continue; // frame straddles a jump of the displacement
        }
        assert!(
            (p.freq - a.abs()).abs() <= bin,
            "t {} peak {} expected {}",
            p.t,
            p.freq,
            a.abs()
        );
        checked += 1;
    }
    assert!(checked > track.len() * 9 / 10);
}

#[test]
fn mitigation_never_hurts_at_low_osrr() {
    let sc = scenario(12e3);
    let ofdm = OfdmConfig::default();
    for seed in [1, 2] {
        let sc = Scenario { seed, ..sc.clone() };
        let out = run_link_experiment(&sc, &ofdm, &ScanAxis::Osrr(vec![-2.0, 1.0, 3.0, 5.0])).unwrap();
        for pair in out.chunks(4) {
            let evm = |c: Case| {
                pair.iter()
                    .find(|o| o.case == c)
                    .unwrap()
                    .result
                    .as_ref()
                    .map(|r| r.evm_avg)
            };
            let on = evm(Case::FrSwept).unwrap();
            // an Err here means the static receiver lost lock entirely
            if let Ok(off) = evm(Case::FrStatic) {
                assert!(on <= off, "osrr {}: {on} > {off}", pair[0].osrr_db);
            }
        }
    }
}

#[test]
fn reflection_free_evm_grows_with_loss() {
    let sc = scenario(12e3);
    let budgets: Vec<f64> = (0..8).map(|k| 20.0 + 1.5 * k as f64).collect();
    let out = run_link_experiment(&sc, &OfdmConfig::default(), &ScanAxis::Budget(budgets)).unwrap();
    for case in [Case::NoFrStatic, Case::NoFrSwept] {
        let evm: Vec<f64> = out
            .iter()
            .filter(|o| o.case == case)
            .map(|o| o.result.as_ref().unwrap().evm_avg)
            .collect();
        assert!(evm.windows(2).all(|w| w[1] >= w[0]), "{case:?}: {evm:?}");
    }
}

#[test]
fn synchronized_pair_stays_locked_over_a_full_period() {
    let mut sc = scenario(12e3);
    sc.osrr_db = 5.0;
    for mismatch in [0.0, 60e6, 99e6] {
        sc.lo_deviation_mismatch = mismatch;
        let n = (sc.period() * sc.sample_rate) as usize;
        let det = Link::prepare(&sc, n).unwrap().run(&vec![Complex64::default(); n], 0.8);
        assert_eq!(det.lock_fraction(), 1.0, "mismatch {mismatch}");
    }
}
