//! Cross-module oracle checks with measured residuals.

use serde::{Deserialize, Serialize};
use sff_core::channels::{
    coherent_gibbs_dm, coherent_gibbs_state, dephasing_closed_form, dephasing_propagate, fidelity_pure,
    instrument_recover, min_steps, mixed_unitary_apply, nojump_propagate, purity, DensityMatrix, MixedUnitaryEnsemble,
    UnitaryGenerator,
};
use sff_core::ensembles::{sample_goe, sample_spectrum, GoeConfig, Spectrum};
use sff_core::filters::{
    deformed_plateau, freq_filtered_sff, nojump_sff, DeformationFn, EigenvalueFilter, FrequencyFilter,
};
use sff_core::liouvillian::{build_liouvillian, continuous_evolve, deform, kick_evolve, ChiSchedule};
use sff_core::quadrature::{kraus_normalization_check, KrausFamily, DEFAULT_HERMITE_NODES, DEFAULT_MIDPOINT_NODES};
use sff_core::recovery::{exact_deconvolve, transfer, wiener_deconvolve, SampledSignal};
use sff_core::rng::{realization_rng, uniform};
use sff_core::spectral::{sff, sff_state_check, thermal_energy_variance};
use sff_core::Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Closed-form constants the suite compares against. Perturbing one must
/// make its check fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixture {
    /// `½(1 + e^{−1} cos 2)`: levels {0, 2}, β = 0, κ = 0.25, t = 1.
    pub two_level_freq: f64,
    /// Survival of the same pair with no filter at t = π/2: `½(1 + cos π)`.
    pub two_level_unfiltered: f64,
}

impl Default for Fixture {
    fn default() -> Self {
        Self { two_level_freq: 0.5 * (1.0 + (-1.0f64).exp() * 2.0f64.cos()), two_level_unfiltered: 0.0 }
    }
}

pub fn verify_suite() -> VerifyReport {
    verify_suite_with(&Fixture::default())
}

fn random_spectra(n: usize, max_dim: usize, seed: u64) -> Vec<Spectrum> {
    (0..n as u64)
        .map(|i| {
            let mut rng = realization_rng(seed, i);
            let d = 2 + (uniform(&mut rng) * (max_dim - 1) as f64) as usize;
            Spectrum::new((0..d.min(max_dim)).map(|_| 2.0 * uniform(&mut rng) - 1.0).collect()).expect("finite")
        })
        .collect()
}

fn max_gap(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn double_sum(e: &[f64], beta: f64, t: f64) -> f64 {
    let z: f64 = e.iter().map(|x| (-beta * x).exp()).sum();
    let mut acc = 0.0;
    for a in e {
        for b in e {
            acc += (-beta * (a + b)).exp() * (t * (a - b)).cos();
        }
    }
    acc / (z * z)
}

type Probe = fn(&Fixture) -> sff_core::Result<f64>;

pub fn verify_suite_with(fx: &Fixture) -> VerifyReport {
    let probes: Vec<(&str, f64, Probe)> = vec![
        ("sff_double_sum", 1e-12, |_| {
            let mut worst: f64 = 0.0;
            for (i, s) in random_spectra(50, 24, 1).iter().enumerate() {
                let (beta, t) = (0.05 * i as f64, 0.7 * i as f64);
                worst = worst.max((sff(s, beta, t) - double_sum(s.values(), beta, t)).abs());
            }
            Ok(worst)
        }),
        ("sff_at_zero", 1e-12, |_| {
            let w = FrequencyFilter::GaussianDephasing { kappa: 0.3, f: DeformationFn::Identity };
            let mut worst: f64 = 0.0;
            for s in random_spectra(50, 24, 2) {
                worst = worst.max((sff(&s, 0.7, 0.0) - 1.0).abs());
                worst = worst.max((freq_filtered_sff(&s, 0.7, 0.0, &w)? - 1.0).abs());
            }
            Ok(worst)
        }),
        ("sff_state_path", 1e-12, |_| {
            let mut worst: f64 = 0.0;
            for (i, s) in random_spectra(30, 16, 3).iter().enumerate() {
                worst = worst.max((sff_state_check(s, 0.4, i as f64)? - sff(s, 0.4, i as f64)).abs());
            }
            Ok(worst)
        }),
        ("short_time_parabola", 1e-4, |_| {
            let mut worst: f64 = 0.0;
            let cfg = GoeConfig::unit(16, 100, 17)?;
            for i in 0..cfg.count() {
                let s = sample_spectrum(&cfg, i)?;
                let var = thermal_energy_variance(&s, 0.5);
                let t = 0.01 / var.sqrt();
                worst = worst.max((sff(&s, 0.5, t) - (1.0 - var * t * t)).abs());
            }
            Ok(worst)
        }),
        ("kraus_normalization", 1e-6, |_| {
            let g = KrausFamily::gaussian(0.4, DEFAULT_HERMITE_NODES)?;
            let b = KrausFamily::box_window(3.0, DEFAULT_MIDPOINT_NODES)?;
            let mut worst = (kraus_normalization_check(&g) - 1.0).abs().max((kraus_normalization_check(&b) - 1.0).abs());
            for k in 0..20 {
                let nu = 0.2 * k as f64;
                worst = worst.max((g.characteristic(nu) - (-0.4 * nu * nu).exp()).abs());
            }
            Ok(worst)
        }),
        ("two_level_freq_closed_form", 1e-15, |fx| {
            let s = Spectrum::new(vec![0.0, 2.0])?;
            let w = FrequencyFilter::GaussianDephasing { kappa: 0.25, f: DeformationFn::Identity };
            Ok((freq_filtered_sff(&s, 0.0, 1.0, &w)? - fx.two_level_freq).abs())
        }),
        ("two_level_unfiltered_closed_form", 1e-15, |fx| {
            let s = Spectrum::new(vec![0.0, 2.0])?;
            Ok((sff(&s, 0.0, core::f64::consts::FRAC_PI_2) - fx.two_level_unfiltered).abs())
        }),
        ("dephasing_ode", 1e-8, |_| {
            let mut worst: f64 = 0.0;
            for (i, s) in random_spectra(20, 8, 4).iter().enumerate() {
                let x = s.values().to_vec();
                let rho0 = coherent_gibbs_dm(s, 0.3)?;
                let t = 0.05 * i as f64;
                let num = dephasing_propagate(&rho0, s, &x, 0.3, t, min_steps(s, &x, 0.3, t))?;
                worst = worst.max(max_gap(&num, &dephasing_closed_form(&rho0, s, &x, 0.3, t)?));
            }
            Ok(worst)
        }),
        ("nojump_ode", 1e-7, |_| {
            let mut worst: f64 = 0.0;
            for (i, s) in random_spectra(20, 8, 5).iter().enumerate() {
                let x = s.values().to_vec();
                let rho0 = coherent_gibbs_dm(s, 0.3)?;
                let t = 0.05 * i as f64;
                let num = nojump_propagate(&rho0, s, &x, 0.3, t, min_steps(s, &x, 0.3, t))?;
                let surv = fidelity_pure(&coherent_gibbs_state(s, 0.3), &num)?;
                worst = worst.max((surv - nojump_sff(s, 0.3, t, 0.3, &DeformationFn::Identity)?).abs());
            }
            Ok(worst)
        }),
        ("liouvillian_kick", 1e-10, |_| {
            let mut worst: f64 = 0.0;
            for (i, s) in random_spectra(20, 8, 6).iter().enumerate() {
                let l = build_liouvillian(s)?;
                let w = FrequencyFilter::Gaussian { alpha: 0.2, f: DeformationFn::Identity };
                let rho0 = coherent_gibbs_dm(s, 0.3)?;
                let t = 0.3 * i as f64;
                let out = kick_evolve(&rho0, &l, &deform(&l, &w, 0.0)?, t)?;
                let surv = fidelity_pure(&coherent_gibbs_state(s, 0.3), &out)?;
                worst = worst.max((surv - freq_filtered_sff(s, 0.3, t, &w)?).abs());
            }
            Ok(worst)
        }),
        ("liouvillian_linear_chi", 1e-8, |_| {
            let mut worst: f64 = 0.0;
            for (i, s) in random_spectra(10, 6, 7).iter().enumerate() {
                let l = build_liouvillian(s)?;
                let w = deform(&l, &FrequencyFilter::GaussianDephasing { kappa: 0.3, f: DeformationFn::Identity }, 1.0)?;
                let rho0 = coherent_gibbs_dm(s, 0.3)?;
                let t = 0.1 * i as f64;
                let out = continuous_evolve(&rho0, &l, &w, &ChiSchedule::Linear, t, 1000)?;
                worst = worst.max(max_gap(&out, &dephasing_closed_form(&rho0, s, s.values(), 0.3, t)?));
            }
            Ok(worst)
        }),
        ("mixed_unitary_gaussian", 1e-6, |_| {
            let mut worst: f64 = 0.0;
            for (i, s) in random_spectra(20, 8, 8).iter().enumerate() {
                let t = 0.1 * i as f64;
                let fam = KrausFamily::gaussian(0.3 * t, DEFAULT_HERMITE_NODES)?;
                let ens = MixedUnitaryEnsemble::time_shifts(s.clone(), &fam)?;
                let out = mixed_unitary_apply(&coherent_gibbs_dm(s, 0.3)?, &ens, t)?;
                let surv = fidelity_pure(&coherent_gibbs_state(s, 0.3), &out)?;
                let w = FrequencyFilter::GaussianDephasing { kappa: 0.3, f: DeformationFn::Identity };
                worst = worst.max((surv - freq_filtered_sff(s, 0.3, t, &w)?).abs());
            }
            Ok(worst)
        }),
        ("unitality", 0.0, |_| {
            let s = sample_spectrum(&GoeConfig::unit(6, 1, 9)?, 0)?;
            let mixed = DensityMatrix::maximally_mixed(6)?;
            let ens = MixedUnitaryEnsemble::time_shifts(s, &KrausFamily::gaussian(0.5, DEFAULT_HERMITE_NODES)?)?;
            Ok(max_gap(&mixed_unitary_apply(&mixed, &ens, 1.1)?, &mixed))
        }),
        ("purity_monotone", 0.0, |_| {
            let s = sample_spectrum(&GoeConfig::unit(6, 1, 10)?, 0)?;
            let rho0 = coherent_gibbs_dm(&s, 0.2)?;
            let mut prev = f64::INFINITY;
            let mut worst: f64 = 0.0;
            for k in 0..=20 {
                let p = purity(&dephasing_closed_form(&rho0, &s, s.values(), 0.3, 0.1 * k as f64)?);
                worst = worst.max(p - prev);
                prev = p;
            }
            Ok(worst)
        }),
        ("recovery_fidelity", 1e-12, |_| {
            let cfg = GoeConfig::unit(3, 3, 21)?;
            let members = (0..3).map(|i| Ok((1.0 / 3.0, UnitaryGenerator::Hamiltonian(sample_goe(&cfg, i)?)))).collect::<sff_core::Result<_>>()?;
            let ens = MixedUnitaryEnsemble::new(None, members)?;
            let psi = vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.48), Complex64::new(0.64, 0.0)];
            let rho0 = DensityMatrix::pure(&psi)?;
            let mut rng = realization_rng(99, 0);
            let mut worst: f64 = 0.0;
            for _ in 0..200 {
                let r = instrument_recover(&rho0, &ens, 1.5, &mut rng)?;
                worst = worst.max(1.0 - fidelity_pure(&psi, &r.recovered)?);
            }
            Ok(worst)
        }),
        ("exact_deconvolution", 1e-12, |_| {
            let w = FrequencyFilter::GaussianDephasing { kappa: 0.1, f: DeformationFn::Identity };
            let mut worst: f64 = 0.0;
            for (i, s) in random_spectra(30, 12, 11).iter().enumerate() {
                let t = 0.5 * i as f64;
                worst = worst.max((exact_deconvolve(s, 0.2, t, &w)? - sff(s, 0.2, t)).abs());
            }
            Ok(worst)
        }),
        ("wiener_two_level", 1e-3, |_| {
            let g = FrequencyFilter::Gaussian { alpha: 0.25, f: DeformationFn::Identity };
            let dt = 10.0 * core::f64::consts::PI / 1024.0;
            let sig = SampledSignal::sample(0.0, dt, 1024, |t| 0.5 * (1.0 + (-1.0f64).exp() * (2.0 * t).cos()))?;
            let out = wiener_deconvolve(&sig, &transfer(&sig, &g, 0.0)?, 1e-8)?;
            let times = out.times();
            Ok(out.central(0.8).map(|j| (out.values()[j] - 0.5 * (1.0 + (2.0 * times[j]).cos())).abs()).fold(0.0, f64::max))
        }),
        ("deformed_plateau_renyi", 1e-12, |_| {
            let w = EigenvalueFilter::Gaussian { alpha: 0.3, f: DeformationFn::Identity };
            let mut worst: f64 = 0.0;
            for s in random_spectra(30, 16, 12) {
                let p = deformed_plateau(&s, 0.5, &w, 0.0)?;
                worst = worst.max((p.plateau - (-p.renyi2).exp()).abs());
            }
            Ok(worst)
        }),
    ];
    let checks: Vec<Check> = probes
        .into_iter()
        .map(|(name, tolerance, probe)| {
            let residual = probe(fx).unwrap_or(f64::INFINITY);
            Check { name: name.to_string(), passed: residual <= tolerance, residual, tolerance }
        })
        .collect();
    VerifyReport { passed: checks.iter().all(|c| c.passed), checks }
}
