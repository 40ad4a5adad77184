use core::f64::consts::PI;
use num_complex::Complex64;
use proptest::prelude::*;
use sff_core::ensembles::Spectrum;
use sff_core::filters::{freq_filtered_sff, DeformationFn, FrequencyFilter};
use sff_core::recovery::{
    convolve, direct_deconvolve, exact_deconvolve, fft, transfer, wiener_deconvolve, SampledSignal,
};
use sff_core::rng::{realization_rng, NormalSampler};
use sff_core::spectral::sff;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

const OMEGA: f64 = 2.0;
const ALPHA: f64 = 0.25;

fn static_gauss() -> FrequencyFilter {
    FrequencyFilter::Gaussian { alpha: ALPHA, f: DeformationFn::Identity }
}

/// d = 2, β = 0, levels {0, ω}: SFF = ½(1 + cos ωt).
fn unfiltered(t: f64) -> f64 {
    0.5 * (1.0 + (OMEGA * t).cos())
}

fn filtered(t: f64) -> f64 {
    0.5 * (1.0 + (-ALPHA * OMEGA * OMEGA).exp() * (OMEGA * t).cos())
}

/// 1024 samples of one period block `[0, 10π)`, so ω = 2 sits on bin 10.
fn periodic_signal(f: impl Fn(f64) -> f64) -> SampledSignal {
    SampledSignal::sample(0.0, 10.0 * PI / 1024.0, 1024, f).unwrap()
}

fn central_max_error(a: &SampledSignal, f: impl Fn(f64) -> f64) -> f64 {
    let t = a.times();
    a.central(0.8).map(|j| (a.values()[j] - f(t[j])).abs()).fold(0.0, f64::max)
}

fn central_rms(a: &SampledSignal, f: impl Fn(f64) -> f64) -> f64 {
    let t = a.times();
    let r = a.central(0.8);
    let n = r.len() as f64;
    (r.map(|j| (a.values()[j] - f(t[j])).powi(2)).sum::<f64>() / n).sqrt()
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn exact_round_trip(e in prop::collection::vec(-2.0f64..2.0, 2..=12), beta in 0.0f64..2.0, t in 0.0f64..20.0, kappa in 0.0f64..0.3) {
        let s = Spectrum::new(e).unwrap();
        let w = FrequencyFilter::GaussianDephasing { kappa, f: DeformationFn::Identity };
        if let Ok(v) = exact_deconvolve(&s, beta, t, &w) {
            prop_assert!((v - sff(&s, beta, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn wiener_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, seed in any::<u64>()) {
        let mut rng = realization_rng(seed, 0);
        let mut g = NormalSampler::new();
        let x: Vec<f64> = (0..256).map(|_| g.sample(&mut rng)).collect();
        let y: Vec<f64> = (0..256).map(|_| g.sample(&mut rng)).collect();
        let sx = SampledSignal::new(0.0, 0.1, x.clone()).unwrap();
        let sy = SampledSignal::new(0.0, 0.1, y.clone()).unwrap();
        let sxy = SampledSignal::new(0.0, 0.1, x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect()).unwrap();
        let w = transfer(&sx, &static_gauss(), 0.0).unwrap();
        let rx = wiener_deconvolve(&sx, &w, 1e-6).unwrap();
        let ry = wiener_deconvolve(&sy, &w, 1e-6).unwrap();
        let rxy = wiener_deconvolve(&sxy, &w, 1e-6).unwrap();
        for j in 0..256 {
            prop_assert!((rxy.values()[j] - (a * rx.values()[j] + b * ry.values()[j])).abs() < 1e-10);
        }
    }
}

#[test]
fn exact_examples() {
    let s = Spectrum::new(vec![-0.3, 0.1, 0.9, 1.4]).unwrap();
    let ones = FrequencyFilter::Gaussian { alpha: 0.0, f: DeformationFn::Identity };
    assert_eq!(exact_deconvolve(&s, 0.4, 2.5, &ones).unwrap(), freq_filtered_sff(&s, 0.4, 2.5, &ones).unwrap());
    // T·Δ = 2π puts the (0, 1) pair on the first sinc zero.
    let s = Spectrum::new(vec![0.0, 1.0, 2.5]).unwrap();
    assert!(exact_deconvolve(&s, 0.0, 1.0, &FrequencyFilter::TimeWindow { duration: 2.0 * PI }).is_err());
    assert!((exact_deconvolve(&s, 0.0, 1.0, &FrequencyFilter::TimeWindow { duration: 1.0 }).unwrap() - sff(&s, 0.0, 1.0)).abs() < 1e-12);
}

#[test]
fn transform_round_trip() {
    let mut rng = realization_rng(5, 1);
    let mut g = NormalSampler::new();
    for &n in &[2usize, 8, 64, 1024] {
        let x: Vec<Complex64> = (0..n).map(|_| Complex64::new(g.sample(&mut rng), g.sample(&mut rng))).collect();
        let mut y = x.clone();
        fft(&mut y, false).unwrap();
        fft(&mut y, true).unwrap();
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).norm() < 1e-12));
    }
    assert!(fft(&mut vec![Complex64::new(0.0, 0.0); 12], false).is_err());
}

#[test]
fn identity_filter_passes_through() {
    let sig = periodic_signal(|t| (0.3 * t).sin() + 0.1 * t);
    let ones = vec![1.0; sig.len()];
    let out = wiener_deconvolve(&sig, &ones, 1e-12).unwrap();
    assert!(out.values().iter().zip(sig.values()).all(|(a, b)| (a - b).abs() < 1e-9));
}

#[test]
fn wiener_recovers_two_level_curve() {
    let sig = periodic_signal(filtered);
    let w = transfer(&sig, &static_gauss(), 0.0).unwrap();
    // The forward filter applied to the unfiltered samples reproduces the filtered curve.
    let fwd = convolve(&periodic_signal(unfiltered), &w).unwrap();
    assert!(central_max_error(&fwd, filtered) < 1e-12);
    let out = wiener_deconvolve(&sig, &w, 1e-8).unwrap();
    let err = central_max_error(&out, unfiltered);
    assert!(err <= 1e-3, "max error {err}");

    // Non-periodic window [0, 32]: the wrap-around jump leaks into every bin
    // and high bins are amplified by up to 1/(2√ε).
    let raw = SampledSignal::sample(0.0, 32.0 / 1023.0, 1024, filtered).unwrap();
    let w = transfer(&raw, &static_gauss(), 0.0).unwrap();
    let out = wiener_deconvolve(&raw, &w, 1e-8).unwrap();
    println!("non-periodic [0, 32] window: central max error {:.3e}", central_max_error(&out, unfiltered));
}

#[test]
fn epsilon_convergence() {
    let sig = periodic_signal(filtered);
    let w = transfer(&sig, &static_gauss(), 0.0).unwrap();
    let errs: Vec<f64> = [1e-4, 1e-6, 1e-8]
        .iter()
        .map(|&eps| central_max_error(&wiener_deconvolve(&sig, &w, eps).unwrap(), unfiltered))
        .collect();
    println!("wiener error over eps {{1e-4, 1e-6, 1e-8}}: {:.3e} {:.3e} {:.3e}", errs[0], errs[1], errs[2]);
    assert!(errs[0] > errs[1] && errs[1] > errs[2]);
}

#[test]
fn wiener_beats_direct_under_noise() {
    let mut rng = realization_rng(2024, 0);
    let mut g = NormalSampler::new();
    let clean = periodic_signal(filtered);
    let noisy = SampledSignal::new(clean.t0(), clean.dt(), clean.values().iter().map(|v| v + 1e-3 * g.sample(&mut rng)).collect()).unwrap();
    let w = transfer(&noisy, &static_gauss(), 0.0).unwrap();
    let wiener = central_rms(&wiener_deconvolve(&noisy, &w, 1e-6).unwrap(), unfiltered);
    let direct = central_rms(&direct_deconvolve(&noisy, &w).unwrap(), unfiltered);
    println!("noisy recovery rms: wiener {wiener:.3e}, direct {direct:.3e}");
    assert!(wiener < direct);
}
