//! `sff-lab` command line.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sff_core::channels::{coherent_gibbs_dm, coherent_gibbs_state, dephasing_closed_form, dephasing_propagate, fidelity_pure, min_steps, purity};
use sff_core::ensembles::sample_spectrum;
use sff_core::filters::DeformationFn;
use sff_core::recovery::{transfer, wiener_deconvolve, DEFAULT_NOISE_FLOOR};
use sff_core::spectral::{dip_time, dip_time_of_mean, plateau_estimate, rv_plateau, Spacing};

use crate::config::{parse_deformation, Filter, FilterSpec, GridSpec, RunConfig};
use crate::error::{LabError, Result};
use crate::formats::{fmt_f64, signal_from_csv, signal_to_csv, to_json_pretty, CurveTable, SpectraFile};
use crate::manifest::{execute, export, Format, RunManifest};
use crate::recipes::recipe;
use crate::run::resolve_workers;
use crate::scan::scan_dimension;
use crate::svg::{render, Series};
use crate::verify::verify_suite;

#[derive(Debug, Parser)]
#[command(name = "sff-lab", version, about = "Spectral form factor laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample GOE spectra and write them as JSON.
    Sample(RunArgs),
    /// Ensemble-averaged SFF curves.
    Sff(RunArgs),
    /// Ensemble SFF with relative variance; needs count >= 2.
    Rv(RunArgs),
    /// RV and SFF plateaus across dimensions.
    ScanDim(ScanArgs),
    /// Dephasing channel on one realization, integrated and closed form.
    Dephase(RunArgs),
    /// Wiener deconvolution of a sampled `t,value` signal.
    Deconvolve(DeconvolveArgs),
    /// Run the oracle suite and print its JSON report.
    Verify,
    /// Convert curve CSVs to csv, json or svg.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub count: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    /// Comma-separated list; more than one value sweeps κ.
    #[arg(long, value_delimiter = ',')]
    pub kappa: Vec<f64>,
    /// none, freq-gauss, eig-gauss, window, eig-nojump
    #[arg(long)]
    pub filter: Option<String>,
    /// identity, power:p, affine:a:b
    #[arg(long)]
    pub f: Option<String>,
    /// Time-window length.
    #[arg(long = "T")]
    pub duration: Option<f64>,
    #[arg(long)]
    pub tmin: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Defaults to $SFF_LAB_WORKERS, then to the number of cores.
    #[arg(long)]
    pub workers: Option<usize>,
    /// JSON run config or manifest; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Figure preset (fig1a, fig1b, ...); flags override it.
    #[arg(long)]
    pub recipe: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct DeconvolveArgs {
    /// Signal CSV with header `t,value`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "freq-gauss")]
    pub filter: String,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long = "T")]
    pub duration: Option<f64>,
    #[arg(long)]
    pub f: Option<String>,
    /// Filter time at which the kernel is frozen.
    #[arg(long, default_value_t = 1.0)]
    pub at: f64,
    #[arg(long, default_value_t = DEFAULT_NOISE_FLOOR)]
    pub eps: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    /// Curve CSVs (`t,sff_mean,sff_sq_mean,rv`).
    #[arg(long, num_args = 0..)]
    pub input: Vec<PathBuf>,
    #[arg(long, default_value = "svg")]
    pub format: String,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

impl RunArgs {
    /// Config file or recipe, then defaults, then flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match (&self.config, &self.recipe) {
            (Some(_), Some(_)) => return Err(LabError::Validation("--config and --recipe are exclusive".into())),
            (Some(p), None) => RunConfig::from_json(&std::fs::read_to_string(p).map_err(LabError::io(p))?)?,
            (None, Some(r)) => recipe(r)?,
            (None, None) => RunConfig::default(),
        };
        if let Some(v) = self.dim {
            c.ensemble.dim = v;
        }
        if let Some(v) = self.sigma {
            c.ensemble.sigma = v;
        }
        if let Some(v) = self.count {
            c.ensemble.count = v;
        }
        if let Some(v) = self.seed {
            c.ensemble.base_seed = v;
        }
        if !self.beta.is_empty() {
            c.betas = self.beta.clone();
        }
        let f = self.f.as_deref().map(parse_deformation).transpose()?;
        if let Some(name) = &self.filter {
            let kappa = self.kappa.first().copied().or(c.filter.as_ref().and_then(|s| s.kappa));
            let duration = self.duration.or(c.filter.as_ref().and_then(|s| s.duration));
            c.filter = FilterSpec::from_name(name, kappa, duration, f.unwrap_or_default())?;
        } else if let Some(spec) = c.filter.as_mut() {
            if let Some(k) = self.kappa.first() {
                spec.kappa = Some(*k);
            }
            if let Some(t) = self.duration {
                spec.duration = Some(t);
            }
            if let Some(f) = f {
                spec.f = f;
            }
        }
        if self.kappa.len() > 1 {
            c.kappas = self.kappa.clone();
        } else if self.kappa.len() == 1 {
            c.kappas.clear();
        }
        if let Some(v) = self.tmin {
            c.grid.tmin = v;
        }
        if let Some(v) = self.tmax {
            c.grid.tmax = v;
        }
        if let Some(v) = self.points {
            c.grid.points = v;
        }
        c.validate()?;
        Ok(c)
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample(a) => sample(&a),
        Command::Sff(a) => ensemble(&a, false),
        Command::Rv(a) => ensemble(&a, true),
        Command::ScanDim(a) => scan(&a),
        Command::Dephase(a) => dephase(&a),
        Command::Deconvolve(a) => deconvolve(&a),
        Command::Verify => verify(),
        Command::Export(a) => export_cmd(&a),
    }
}

fn sample(a: &RunArgs) -> Result<()> {
    let c = a.resolve()?;
    let file = SpectraFile::sample(&c.ensemble.goe()?)?;
    let mut manifest = RunManifest::new(c);
    let path = manifest.emit(&a.out, "spectra.json", &to_json_pretty(&file, "spectra")?)?;
    manifest.save(&a.out)?;
    println!("{}", path.display());
    Ok(())
}

fn ensemble(a: &RunArgs, need_rv: bool) -> Result<()> {
    let c = a.resolve()?;
    if need_rv && c.ensemble.count < 2 {
        return Err(LabError::Validation("relative variance needs --count >= 2".into()));
    }
    let (manifest, results) = execute(&c, &a.out, resolve_workers(a.workers)?)?;
    println!("case\tsff_plateau\trv_plateau\tdip_time");
    for r in &results {
        let sff_p = plateau_estimate(&r.mean.grid, &r.mean.values).map_or_else(|_| "-".into(), fmt_f64);
        let (rv_p, dip) = match &r.rv {
            Some(rv) => (
                rv_plateau(rv).map_or_else(|_| "-".into(), fmt_f64),
                if r.case.filter.is_some() { dip_time(rv)? } else { dip_time_of_mean(&r.mean) },
            ),
            None => ("-".into(), dip_time_of_mean(&r.mean)),
        };
        println!("{}\t{sff_p}\t{rv_p}\t{}", r.case.label(), fmt_f64(dip));
    }
    println!("{} files, manifest in {}", manifest.outputs.len(), a.out.display());
    Ok(())
}

fn scan(a: &ScanArgs) -> Result<()> {
    let c = a.run.resolve()?;
    let res = scan_dimension(&c.ensemble.goe()?, &a.dims, &c.betas, &c.filters(), &c.grid.build()?, resolve_workers(a.run.workers)?)?;
    let mut manifest = RunManifest::new(c.clone());
    manifest.emit(&a.run.out, "scaling.csv", &res.to_csv())?;
    manifest.emit(&a.run.out, "scaling.json", &to_json_pretty(&res, "scaling")?)?;
    let dims: Vec<f64> = res.dims.iter().map(|&d| d as f64).collect();
    let mut series = Vec::new();
    for &beta in &c.betas {
        for f in c.filters() {
            let label = f.as_ref().map_or_else(|| "none".to_string(), FilterSpec::label);
            let ys: Vec<Option<f64>> = res.rows_for(beta, &label).map(|r| Some(r.rv_plateau)).collect();
            series.push(Series::new(format!("b{beta} {label}"), false, &dims, ys));
        }
    }
    manifest.emit(&a.run.out, "scaling.svg", &render("RV plateau vs dimension", "d", &series))?;
    manifest.save(&a.run.out)?;
    print!("{}", res.to_csv());
    Ok(())
}

fn dephase(a: &RunArgs) -> Result<()> {
    let mut c = a.resolve()?;
    if a.tmin.is_none() && a.tmax.is_none() && a.recipe.is_none() && a.config.is_none() {
        c.grid = GridSpec { spacing: Spacing::Linear, tmin: 0.0, tmax: 10.0, points: a.points.unwrap_or(101) };
    }
    let grid = c.grid.build()?;
    let kappa = c.filter.as_ref().and_then(|f| f.kappa).or(a.kappa.first().copied()).unwrap_or(0.1);
    let f = c.filter.as_ref().map_or(DeformationFn::Identity, |s| s.f);
    let beta = c.betas[0];
    let goe = c.ensemble.goe()?.with_count(1)?;
    let s = sample_spectrum(&goe, 0)?;
    let x = f.on_spectrum(&s)?;
    let psi = coherent_gibbs_state(&s, beta);
    let mut rho = coherent_gibbs_dm(&s, beta)?;
    let rho0 = rho.clone();
    let mut t_prev = 0.0;
    let mut out = String::from("t,survival,purity,closed_form_survival\n");
    for &t in grid.times() {
        let dt = t - t_prev;
        if dt > 0.0 {
            rho = dephasing_propagate(&rho, &s, &x, kappa, dt, min_steps(&s, &x, kappa, dt))?;
        }
        t_prev = t;
        let exact = dephasing_closed_form(&rho0, &s, &x, kappa, t)?;
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(t),
            fmt_f64(fidelity_pure(&psi, &rho)?),
            fmt_f64(purity(&rho)),
            fmt_f64(fidelity_pure(&psi, &exact)?)
        ));
    }
    let mut manifest = RunManifest::new(c);
    let path = manifest.emit(&a.out, "dephase.csv", &out)?;
    manifest.save(&a.out)?;
    println!("{}", path.display());
    Ok(())
}

fn deconvolve(a: &DeconvolveArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.input).map_err(LabError::io(&a.input))?;
    let signal = signal_from_csv(&text, &a.input)?;
    let f = a.f.as_deref().map(parse_deformation).transpose()?.unwrap_or_default();
    let spec = FilterSpec::from_name(&a.filter, a.kappa, a.duration, f)?
        .ok_or_else(|| LabError::Validation("deconvolve needs a filter".into()))?;
    let Filter::Frequency(w) = spec.build()? else {
        return Err(LabError::Validation("only frequency filters are convolutions in time".into()));
    };
    let out = wiener_deconvolve(&signal, &transfer(&signal, &w, a.at)?, a.eps)?;
    let path = a.out.join("deconvolved.csv");
    crate::formats::write_file(&path, &signal_to_csv(&out))?;
    println!("{}", path.display());
    Ok(())
}

fn verify() -> Result<()> {
    let report = verify_suite();
    print!("{}", to_json_pretty(&report, "report")?);
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(LabError::ChecksFailed(failed.join(", ")))
    }
}

fn export_cmd(a: &ExportArgs) -> Result<()> {
    let format: Format = a.format.parse()?;
    let curves = a
        .input
        .iter()
        .map(|p| Ok((stem(p), CurveTable::read(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut manifest = RunManifest::new(RunConfig::default());
    for p in export(&curves, format, &a.out, &mut manifest)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| "curve".into(), |s| s.to_string_lossy().into_owned())
}
