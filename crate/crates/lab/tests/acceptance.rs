//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use sff_core::channels::{
    coherent_gibbs_dm, coherent_gibbs_state, dephasing_closed_form, dephasing_propagate, fidelity_pure, min_steps,
    mixed_unitary_apply, nojump_propagate, purity, DensityMatrix, MixedUnitaryEnsemble,
};
use sff_core::ensembles::{sample_spectrum, GoeConfig, Spectrum};
use sff_core::filters::{
    deformed_plateau, eig_filtered_sff, freq_filtered_sff, nojump_sff, DeformationFn, EigenvalueFilter,
    FrequencyFilter,
};
use sff_core::liouvillian::{build_liouvillian, continuous_evolve, deform, kick_evolve, ChiSchedule};
use sff_core::quadrature::{KrausFamily, DEFAULT_HERMITE_NODES};
use sff_core::recovery::{direct_deconvolve, transfer, wiener_deconvolve, SampledSignal};
use sff_core::rng::{realization_rng, uniform, NormalSampler};
use sff_core::spectral::{dip_time_of_mean, rv_plateau, TimeGrid};
use sff_lab::config::FilterSpec;
use sff_lab::formats::CurveTable;
use sff_lab::recipes::{recipe, scaling_grid, FIG4_DIMS, FIG5_BETAS};
use sff_lab::run::{eigenvalue_plateau_ratio, frequency_plateau_ratio, run_cases, run_ensemble, Case};
use sff_lab::scan::scan_dimension;
use sff_lab::verify::verify_suite;

type Outcome = Result<(bool, String), String>;

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn spectra(n: usize, max_dim: usize, seed: u64) -> Vec<Spectrum> {
    (0..n as u64)
        .map(|i| {
            let mut rng = realization_rng(seed, i);
            let d = 2 + (uniform(&mut rng) * (max_dim - 1) as f64) as usize;
            Spectrum::new((0..d.min(max_dim)).map(|_| 4.0 * uniform(&mut rng) - 2.0).collect()).unwrap()
        })
        .collect()
}

fn gap(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn c1() -> Outcome {
    let cfg = recipe("fig1a").map_err(e)?;
    let r = run_ensemble(&cfg.ensemble.goe().map_err(e)?, 0.1, None, &cfg.grid.build().map_err(e)?, workers()).map_err(e)?;
    let rv = r.rv.ok_or("no rv")?;
    let dip = dip_time_of_mean(&r.mean);
    let tail: Vec<f64> = rv.grid.times().iter().zip(&rv.values).filter(|(t, _)| **t > dip).filter_map(|(_, v)| *v).collect();
    let avg = tail.iter().sum::<f64>() / tail.len() as f64;
    Ok(((avg - 1.0).abs() <= 0.1, format!("dip t={dip:.3}, mean RV beyond dip {avg:.4} over {} points (1.0 +- 0.1)", tail.len())))
}

fn plateau_identity(name: &str, predicted: fn(&[sff_lab::run::PartitionSample]) -> f64) -> Outcome {
    let cfg = recipe(name).map_err(e)?;
    let r = run_ensemble(&cfg.ensemble.goe().map_err(e)?, 0.1, cfg.filter.as_ref(), &cfg.grid.build().map_err(e)?, workers()).map_err(e)?;
    let measured = 1.0 + rv_plateau(r.rv.as_ref().ok_or("no rv")?).map_err(e)?;
    let expect = predicted(&r.partitions);
    let d = rel(measured, expect);
    Ok((d <= 0.05, format!("ratio {measured:.5} vs {expect:.5} (rel {d:.2e} <= 5e-2), RV = ratio - 1 = {:.5}", measured - 1.0)))
}

fn c2() -> Outcome {
    plateau_identity("fig1b", frequency_plateau_ratio)
}

fn c3() -> Outcome {
    plateau_identity("fig1c", eigenvalue_plateau_ratio)
}

fn c4() -> Outcome {
    let cfg = recipe("fig4-freq").map_err(e)?;
    let f = cfg.filter.clone();
    let res = scan_dimension(&cfg.ensemble.goe().map_err(e)?, &FIG4_DIMS, &[0.1], &[f.clone()], &scaling_grid().build().map_err(e)?, workers())
        .map_err(e)?;
    let rv: Vec<f64> = res.rows_for(0.1, &f.unwrap().label()).map(|r| r.rv_plateau).collect();
    let ok = rv.len() == FIG4_DIMS.len() && rv.windows(2).all(|w| w[1] < w[0]);
    Ok((ok, format!("RV plateau over d={FIG4_DIMS:?}: {}", fmt_list(&rv))))
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(", ")
}

fn c5() -> Outcome {
    let cfg = recipe("fig5").map_err(e)?;
    let freq = cfg.filter.clone().ok_or("fig5 has no filter")?;
    let eig = FilterSpec::from_name("eig-gauss", Some(0.2), None, DeformationFn::Identity).map_err(e)?.unwrap();
    let cases: Vec<Case> = [Some(freq), Some(eig)]
        .into_iter()
        .flat_map(|f| FIG5_BETAS.iter().map(move |&beta| Case { beta, filter: f.clone() }))
        .collect();
    let run = run_cases(&cfg.ensemble.goe().map_err(e)?, &cases, &cfg.grid.build().map_err(e)?, workers()).map_err(e)?;
    let rv: Vec<f64> = run.results().iter().map(|r| rv_plateau(r.rv.as_ref().unwrap())).collect::<Result<_, _>>().map_err(e)?;
    let (f, g) = rv.split_at(FIG5_BETAS.len());
    let freq_up = f.windows(2).all(|w| w[1] > w[0]);
    let eig_flat = g.iter().all(|&x| x <= g[0] + 1e-3);
    Ok((
        freq_up && eig_flat,
        format!("beta {FIG5_BETAS:?}: freq RV {} (increasing: {freq_up}); eig RV {} (never above beta=0.1 + 1e-3: {eig_flat})", fmt_list(f), fmt_list(g)),
    ))
}

const CASES: usize = 50;

fn c6() -> Outcome {
    let (mut deph, mut nj, mut kick, mut chi) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (i, s) in spectra(CASES, 8, 601).iter().enumerate() {
        let mut rng = realization_rng(602, i as u64);
        let beta = uniform(&mut rng);
        let kappa = 0.05 + 0.5 * uniform(&mut rng);
        let t = 3.0 * uniform(&mut rng);
        let x = s.values().to_vec();
        let rho0 = coherent_gibbs_dm(s, beta).map_err(e)?;
        let psi = coherent_gibbs_state(s, beta);
        let steps = min_steps(s, &x, kappa, t);

        let num = dephasing_propagate(&rho0, s, &x, kappa, t, steps).map_err(e)?;
        deph = deph.max(gap(&num, &dephasing_closed_form(&rho0, s, &x, kappa, t).map_err(e)?));

        let num = nojump_propagate(&rho0, s, &x, kappa, t, steps).map_err(e)?;
        let surv = fidelity_pure(&psi, &num).map_err(e)?;
        nj = nj.max((surv - nojump_sff(s, beta, t, kappa, &DeformationFn::Identity).map_err(e)?).abs());

        let l = build_liouvillian(s).map_err(e)?;
        let w = FrequencyFilter::Gaussian { alpha: kappa, f: DeformationFn::Identity };
        let out = kick_evolve(&rho0, &l, &deform(&l, &w, 0.0).map_err(e)?, t).map_err(e)?;
        let surv = fidelity_pure(&psi, &out).map_err(e)?;
        kick = kick.max((surv - freq_filtered_sff(s, beta, t, &w).map_err(e)?).abs());

        let wd = deform(&l, &FrequencyFilter::GaussianDephasing { kappa, f: DeformationFn::Identity }, 1.0).map_err(e)?;
        let out = continuous_evolve(&rho0, &l, &wd, &ChiSchedule::Linear, t, steps.max(400)).map_err(e)?;
        chi = chi.max(gap(&out, &dephasing_closed_form(&rho0, s, &x, kappa, t).map_err(e)?));
    }
    let ok = deph <= 1e-8 && nj <= 1e-7 && kick <= 1e-10 && chi <= 1e-8;
    Ok((ok, format!("{CASES} cases each: dephasing {deph:.2e} (1e-8), no-jump {nj:.2e} (1e-7), kick {kick:.2e} (1e-10), chi=t {chi:.2e} (1e-8)")))
}

fn mixed_vs_freq(s: &Spectrum, beta: f64, kappa: f64, t: f64) -> Result<(f64, f64), String> {
    let fam = KrausFamily::gaussian(kappa * t, DEFAULT_HERMITE_NODES).map_err(e)?;
    let ens = MixedUnitaryEnsemble::time_shifts(s.clone(), &fam).map_err(e)?;
    let out = mixed_unitary_apply(&coherent_gibbs_dm(s, beta).map_err(e)?, &ens, t).map_err(e)?;
    let surv = fidelity_pure(&coherent_gibbs_state(s, beta), &out).map_err(e)?;
    let w = FrequencyFilter::GaussianDephasing { kappa, f: DeformationFn::Identity };
    Ok((surv, freq_filtered_sff(s, beta, t, &w).map_err(e)?))
}

fn c7() -> Outcome {
    let mut closed: f64 = 0.0;
    for k in 0..20 {
        let (omega, beta, kappa, t) = (0.5 + 0.1 * k as f64, 0.05 * k as f64, 0.3, 0.2 * k as f64);
        let s = Spectrum::new(vec![0.0, omega]).unwrap();
        let z = 1.0 + (-beta * omega).exp();
        let (p0, p1) = (1.0 / z, (-beta * omega).exp() / z);
        let exact = p0 * p0 + p1 * p1 + 2.0 * p0 * p1 * (-kappa * t * omega * omega).exp() * (omega * t).cos();
        closed = closed.max((mixed_vs_freq(&s, beta, kappa, t)?.0 - exact).abs());
    }
    let mut random: f64 = 0.0;
    let cfg = GoeConfig::unit(8, 20, 701).map_err(e)?;
    for i in 0..cfg.count() {
        let s = sample_spectrum(&cfg, i).map_err(e)?;
        let (a, b) = mixed_vs_freq(&s, 0.4, 0.2, 0.15 * i as f64)?;
        random = random.max((a - b).abs());
    }
    Ok((closed <= 1e-6 && random <= 1e-6, format!("d=2 closed forms {closed:.2e}, d=8 GOE {random:.2e} (1e-6)")))
}

fn c8() -> Outcome {
    let report = verify_suite();
    let unital = report.check("unitality").ok_or("missing check")?;
    let rec = report.check("recovery_fidelity").ok_or("missing check")?;
    let s = sample_spectrum(&GoeConfig::unit(6, 1, 801).map_err(e)?, 0).map_err(e)?;
    let rho0 = coherent_gibbs_dm(&s, 0.2).map_err(e)?;
    let (mut deph, mut mixed) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let (mut pd, mut pm) = (f64::INFINITY, f64::INFINITY);
    for k in 0..=40 {
        let t = 0.1 * k as f64;
        let a = purity(&dephasing_closed_form(&rho0, &s, s.values(), 0.3, t).map_err(e)?);
        let ens = MixedUnitaryEnsemble::time_shifts(s.clone(), &KrausFamily::gaussian(0.3 * t, DEFAULT_HERMITE_NODES).map_err(e)?).map_err(e)?;
        let b = purity(&mixed_unitary_apply(&rho0, &ens, t).map_err(e)?);
        deph = deph.max(a - pd);
        mixed = mixed.max(b - pm);
        pd = a;
        pm = b;
    }
    let ok = unital.residual == 0.0 && deph <= 0.0 && mixed <= 0.0 && rec.residual <= 1e-12;
    Ok((
        ok,
        format!(
            "unitality defect {:.1e}; largest purity increase dephasing {deph:.2e}, mixed-unitary {mixed:.2e}; recovery 1-F {:.2e}",
            unital.residual, rec.residual
        ),
    ))
}

fn c9() -> Outcome {
    let report = verify_suite();
    let exact = report.check("exact_deconvolution").ok_or("missing check")?.residual;
    let wiener = report.check("wiener_two_level").ok_or("missing check")?.residual;
    let g = FrequencyFilter::Gaussian { alpha: 0.25, f: DeformationFn::Identity };
    let dt = 10.0 * std::f64::consts::PI / 1024.0;
    let clean = SampledSignal::sample(0.0, dt, 1024, |t| 0.5 * (1.0 + (-1.0f64).exp() * (2.0 * t).cos())).map_err(e)?;
    let mut rng = realization_rng(901, 0);
    let mut ns = NormalSampler::new();
    let noisy = SampledSignal::new(0.0, dt, clean.values().iter().map(|v| v + 1e-3 * ns.sample(&mut rng)).collect()).map_err(e)?;
    let w = transfer(&noisy, &g, 0.0).map_err(e)?;
    let rms = |sig: &SampledSignal| {
        let r = sig.central(0.8);
        let n = r.len() as f64;
        let times = sig.times();
        (r.map(|j| (sig.values()[j] - 0.5 * (1.0 + (2.0 * times[j]).cos())).powi(2)).sum::<f64>() / n).sqrt()
    };
    let rw = rms(&wiener_deconvolve(&noisy, &w, 1e-6).map_err(e)?);
    let rd = rms(&direct_deconvolve(&noisy, &w).map_err(e)?);
    let rd = if rd.is_nan() { f64::INFINITY } else { rd };
    let ok = exact <= 1e-12 && wiener <= 1e-3 && rw < rd;
    Ok((ok, format!("exact {exact:.2e} (1e-12), Wiener central-80% {wiener:.2e} (1e-3), noisy RMS Wiener {rw:.3e} < direct {rd:.3e}")))
}

fn c10() -> Outcome {
    let cfg = GoeConfig::unit(64, 100, 1001).map_err(e)?;
    let grid = TimeGrid::log(200, 1e-2, 1e6).map_err(e)?;
    let decade = grid.final_decade().map_err(e)?;
    let w = EigenvalueFilter::Gaussian { alpha: 0.1, f: DeformationFn::Identity };
    let (mut avg, mut renyi) = (0.0, 0.0);
    for i in 0..cfg.count() {
        let s = sample_spectrum(&cfg, i).map_err(e)?;
        let ts = &grid.times()[decade.clone()];
        avg += ts.iter().map(|&t| eig_filtered_sff(&s, 0.5, t, &w)).sum::<Result<f64, _>>().map_err(e)? / ts.len() as f64;
        renyi += (-deformed_plateau(&s, 0.5, &w, 0.0).map_err(e)?.renyi2).exp();
    }
    let n = cfg.count() as f64;
    let (avg, renyi) = (avg / n, renyi / n);
    let d = rel(avg, renyi);
    Ok((d <= 0.02, format!("final-decade mean {avg:.5e} vs exp(-S2) {renyi:.5e} (rel {d:.2e} <= 2e-2)")))
}

fn c11() -> Outcome {
    let report = verify_suite();
    let names = ["sff_at_zero", "kraus_normalization", "short_time_parabola"];
    let checks: Vec<_> = names.iter().map(|n| report.check(n).ok_or("missing check")).collect::<Result<_, _>>()?;
    let ok = checks.iter().all(|c| c.passed);
    let detail = checks.iter().map(|c| format!("{} {:.2e} ({:.0e})", c.name, c.residual, c.tolerance)).collect::<Vec<_>>().join(", ");
    Ok((ok, detail))
}

fn c12() -> Outcome {
    let cfg = recipe("fig1a").map_err(e)?;
    let goe = cfg.ensemble.goe().map_err(e)?;
    let grid = cfg.grid.build().map_err(e)?;
    let csv = |n| run_ensemble(&goe, 0.1, None, &grid, n).map(|r| CurveTable::from_result(&r).to_csv()).map_err(e);
    let base = csv(1)?;
    let same = [4, 8].into_iter().map(|n| csv(n).map(|c| c == base)).collect::<Result<Vec<_>, _>>()?;
    Ok((same.iter().all(|&b| b), format!("fig1a CSV identical for workers 4, 8 vs 1: {same:?} ({} bytes)", base.len())))
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 12] =
        [(1, c1), (2, c2), (3, c3), (4, c4), (5, c5), (6, c6), (7, c7), (8, c8), (9, c9), (10, c10), (11, c11), (12, c12)];
    let mut failed = 0;
    for (n, f) in criteria {
        let start = Instant::now();
        let (ok, detail) = f().unwrap_or_else(|err| (false, format!("error: {err}")));
        let secs = start.elapsed().as_secs_f64();
        println!("criterion {n:>2}: {} {detail} [{secs:.1}s]", if ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
