//! End-to-end properties of the simulate/transform/fit chain.

use std::f64::consts::TAU;

use noon_core::analysis::{
    advantage_table, estimate_all, fit_line, time_series_transform, LineShape,
};
use noon_core::protocol::run_protocol;
use noon_core::spin_model::GAMMA_FLUORINE;
use noon_core::{AnalysisOptions, EncodingConfig, FieldSpectrum, PeakSeries, SpinSystem};
use num_complex::Complex;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn wrap(x: f64) -> f64 {
    (x + TAU / 2.0).rem_euclid(TAU) - TAU / 2.0
}

/// Direct `O(n²)` DFT at the zero-padded frequencies, normalized to unit max.
fn naive_spectrum(data: &[Complex<f64>], dt: f64, pad: usize) -> (Vec<f64>, Vec<f64>) {
    let len = data.len() * pad;
    let df = 1.0 / (len as f64 * dt);
    let freqs: Vec<f64> = (0..len)
        .map(|k| (k as f64 - (len / 2) as f64) * df)
        .collect();
    let mags: Vec<f64> = freqs
        .iter()
        .map(|&f| {
            data.iter()
                .enumerate()
                .map(|(j, z)| z * Complex::from_polar(1.0, -TAU * f * j as f64 * dt))
                .sum::<Complex<f64>>()
                .norm()
        })
        .collect();
    let top = mags.iter().copied().fold(0.0, f64::max);
    (freqs, mags.iter().map(|m| m / top).collect())
}

fn sampled_line(shape: LineShape, center: f64, fwhm: f64, df: f64, len: usize) -> FieldSpectrum {
    let frequencies: Vec<f64> = (0..len)
        .map(|k| (k as f64 - (len / 2) as f64) * df)
        .collect();
    let magnitudes = frequencies
        .iter()
        .map(|&f| shape.evaluate(f, center, fwhm, 1.0))
        .collect();
    FieldSpectrum {
        l: 1,
        frequencies,
        magnitudes,
        peak_magnitude: 1.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clean_lines_follow_the_phase_law(delta in -3e-5f64..3e-5, tmp: bool) {
        let system = if tmp { SpinSystem::tmp() } else { SpinSystem::hexafluorophosphate() };
        let cfg = EncodingConfig { n_times: 32, ..EncodingConfig::clean(delta, 2e-3) };
        let series = run_protocol(&system, &cfg).unwrap();
        for (&l, row) in series.l_values.iter().zip(&series.amplitudes) {
            for (&t, z) in series.times.iter().zip(row) {
                let expected = wrap(f64::from(l) * system.gamma_satellite * delta * t);
                let got = wrap(z.arg() - row[0].arg());
                prop_assert!(wrap(got - expected).abs() < 1e-9, "l={} t={}", l, t);
                prop_assert!((z.norm() - row[0].norm()).abs() <= 1e-12 * row[0].norm());
            }
        }
    }

    #[test]
    fn stronger_collective_dephasing_shrinks_every_line(t2 in 0.005f64..0.5, shrink in 0.1f64..0.95) {
        let base = SpinSystem::hexafluorophosphate();
        let faster = SpinSystem { t2_collective: t2 * shrink, ..base.clone() };
        let slower = SpinSystem { t2_collective: t2, ..base };
        let cfg = EncodingConfig { n_times: 16, t_max: 0.05, ..EncodingConfig::default() };
        let a = run_protocol(&faster, &cfg).unwrap();
        let b = run_protocol(&slower, &cfg).unwrap();
        for (ra, rb) in a.amplitudes.iter().zip(&b.amplitudes) {
            for (k, (x, y)) in ra.iter().zip(rb).enumerate() {
                prop_assert!(x.norm() <= y.norm() * (1.0 + 1e-12));
                if k > 0 {
                    prop_assert!(x.norm() <= ra[k - 1].norm() * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn transform_matches_direct_dft(f0 in -8000.0f64..8000.0, decay in 0.0f64..500.0, pad in 1usize..=4) {
        let n = 64;
        let t_max = 2e-3;
        let times: Vec<f64> = (0..n).map(|k| k as f64 * t_max / n as f64).collect();
        let row = times.iter().map(|&t| Complex::from_polar((-decay * t).exp(), TAU * f0 * t)).collect();
        let series = PeakSeries { l_values: vec![2], times, amplitudes: vec![row] };
        let spec = time_series_transform(&series, 2, pad).unwrap();
        let (freqs, mags) = naive_spectrum(&series.amplitudes[0], t_max / n as f64, pad);
        for i in 0..freqs.len() {
            prop_assert!((spec.frequencies[i] - freqs[i]).abs() < 1e-9);
            prop_assert!((spec.magnitudes[i] - mags[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn fit_recovers_an_exact_line(
        center in -30.0f64..30.0,
        fwhm in 3.0f64..12.0,
        gaussian: bool,
    ) {
        let shape = if gaussian { LineShape::Gaussian } else { LineShape::Lorentzian };
        let spec = sampled_line(shape, center * 10.0, fwhm * 10.0, 10.0, 512);
        let fit = fit_line(&spec, 15, shape).unwrap();
        prop_assert!((fit.center_hz - center * 10.0).abs() < 1e-9 * 10.0 * fwhm);
        prop_assert!((fit.fwhm_hz - fwhm * 10.0).abs() < 1e-9 * 10.0 * fwhm);
    }
}

#[test]
fn fit_center_is_unbiased_under_noise() {
    let (center, fwhm, df) = (123.4, 80.0, 10.0);
    let clean = sampled_line(LineShape::Lorentzian, center, fwhm, df, 256);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut worst: f64 = 0.0;
    for seed in 0..120u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spec = clean.clone();
        for m in &mut spec.magnitudes {
            *m += noise.sample(&mut rng);
        }
        let fit = fit_line(&spec, 15, LineShape::Lorentzian).unwrap();
        worst = worst.max((fit.center_hz - center).abs());
    }
    assert!(worst < fwhm / 20.0, "worst center error {worst} Hz");
}

#[test]
fn fitted_width_grows_with_dephasing_rate() {
    let opts = AnalysisOptions::default();
    let mut last = 0.0;
    for t2 in [0.5, 0.2, 0.1, 0.06, 0.03] {
        let system = SpinSystem {
            t2_collective: t2,
            ..SpinSystem::hexafluorophosphate()
        };
        let cfg = EncodingConfig {
            t_max: 0.035,
            ..EncodingConfig::default()
        };
        let series = run_protocol(&system, &cfg).unwrap();
        let est = estimate_all(&series, &system, &opts).unwrap();
        let six = est.iter().find(|e| e.l == 6).unwrap();
        assert!(
            six.fwhm_hz > last,
            "t2 = {t2}: {} after {last}",
            six.fwhm_hz
        );
        last = six.fwhm_hz;
    }
}

#[test]
fn clean_advantage_follows_the_coherence_order() {
    let opts = AnalysisOptions::default();
    for system in [SpinSystem::tmp(), SpinSystem::hexafluorophosphate()] {
        for t_max in [2e-3, 2e-2] {
            let cfg = EncodingConfig::clean(noon_core::protocol::REFERENCE_DELTA, t_max);
            let series = run_protocol(&system, &cfg).unwrap();
            let table = advantage_table(&estimate_all(&series, &system, &opts).unwrap()).unwrap();
            for (l, r) in table {
                let rel = (r - f64::from(l)).abs() / f64::from(l);
                assert!(rel < 0.03, "{} l={l} T={t_max}: R={r}", system.name);
            }
        }
    }
}

#[test]
fn clean_estimates_sit_on_the_true_field() {
    let system = SpinSystem::hexafluorophosphate();
    let delta = 11.73e-6;
    let cfg = EncodingConfig::clean(delta, 2e-2);
    let series = run_protocol(&system, &cfg).unwrap();
    for est in estimate_all(&series, &system, &AnalysisOptions::default()).unwrap() {
        // one padded bin in field units
        let bin = TAU / (f64::from(est.l) * GAMMA_FLUORINE) / (8.0 * 2e-2);
        assert!(
            (est.delta_hat - delta).abs() < bin,
            "l={}: {}",
            est.l,
            est.delta_hat
        );
    }
}
