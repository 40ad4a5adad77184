//! Parallel ensemble execution.
//!
//! Realization `i` is sampled from its own counter-keyed stream, and the
//! per-realization accumulators are merged along a balanced binary tree over
//! the index range. The tree depends only on `count`, so the result is the
//! same bit pattern for every worker count.

use rayon::ThreadPool;
use sff_core::ensembles::{sample_spectrum, GoeConfig, Spectrum};
use sff_core::filters::{eig_filtered_sff, freq_filtered_sff, nojump_sff};
use sff_core::spectral::{
    log_partition, relative_variance, sff, EnsembleAccumulator, RvCurve, SffCurve, TimeGrid,
};

use crate::config::{Filter, FilterSpec};
use crate::error::{LabError, Result};

pub const WORKERS_ENV: &str = "SFF_LAB_WORKERS";

/// `--workers`, else `SFF_LAB_WORKERS`, else the machine's parallelism.
pub fn resolve_workers(flag: Option<usize>) -> Result<usize> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| LabError::Validation(format!("{WORKERS_ENV}='{v}' is not a count")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if n == 0 {
        return Err(LabError::Validation("workers must be >= 1".into()));
    }
    Ok(n)
}

fn pool(workers: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| LabError::Validation(format!("thread pool: {e}")))
}

/// SFF of one spectrum along `grid`, filtered or not.
pub fn evaluate(s: &Spectrum, beta: f64, filter: Option<&Filter>, grid: &TimeGrid) -> sff_core::Result<Vec<f64>> {
    grid.times()
        .iter()
        .map(|&t| match filter {
            None => Ok(sff(s, beta, t)),
            Some(Filter::Frequency(w)) => freq_filtered_sff(s, beta, t, w),
            Some(Filter::Eigenvalue(w)) => eig_filtered_sff(s, beta, t, w),
            Some(Filter::Nojump { kappa, f }) => nojump_sff(s, beta, t, *kappa, f),
        })
        .collect()
}

/// One `(β, filter)` combination evaluated on every realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub beta: f64,
    pub filter: Option<FilterSpec>,
}

impl Case {
    pub fn label(&self) -> String {
        let f = self.filter.as_ref().map_or_else(|| "none".to_string(), FilterSpec::label);
        format!("b{}_{f}", self.beta)
    }
}

/// `ln Z(β)` and `ln Z(2β)` of one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionSample {
    pub log_z: f64,
    pub log_z2: f64,
}

#[derive(Debug, Clone)]
struct Partial {
    accs: Vec<EnsembleAccumulator>,
    // [case][realization], in index order.
    partitions: Vec<Vec<PartitionSample>>,
}

impl Partial {
    fn merge(mut self, other: Partial) -> sff_core::Result<Partial> {
        for (a, b) in self.accs.iter_mut().zip(&other.accs) {
            a.merge(b)?;
        }
        for (a, b) in self.partitions.iter_mut().zip(other.partitions) {
            a.extend(b);
        }
        Ok(self)
    }
}

/// Reduced output of a multi-case run.
#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub config: GoeConfig,
    pub grid: TimeGrid,
    pub cases: Vec<Case>,
    pub accumulators: Vec<EnsembleAccumulator>,
    pub partitions: Vec<Vec<PartitionSample>>,
}

/// Mean curve, second moment and relative variance of a single case.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub case: Case,
    pub mean: SffCurve,
    pub mean_sq: SffCurve,
    /// `None` for a single realization.
    pub rv: Option<RvCurve>,
    pub accumulator: EnsembleAccumulator,
    pub partitions: Vec<PartitionSample>,
}

impl EnsembleRun {
    pub fn case(&self, k: usize) -> CaseResult {
        let acc = &self.accumulators[k];
        CaseResult {
            case: self.cases[k].clone(),
            mean: acc.mean(),
            mean_sq: acc.mean_sq(),
            rv: relative_variance(acc).ok(),
            accumulator: acc.clone(),
            partitions: self.partitions[k].clone(),
        }
    }

    pub fn results(&self) -> Vec<CaseResult> {
        (0..self.cases.len()).map(|k| self.case(k)).collect()
    }
}

fn leaf(config: &GoeConfig, filters: &[Option<Filter>], cases: &[Case], grid: &TimeGrid, index: u64) -> Result<Partial> {
    let wrap = |source| LabError::Realization { index, source };
    let s = sample_spectrum(config, index).map_err(wrap)?;
    let mut accs = Vec::with_capacity(cases.len());
    let mut partitions = Vec::with_capacity(cases.len());
    for (case, filter) in cases.iter().zip(filters) {
        let values = evaluate(&s, case.beta, filter.as_ref(), grid).map_err(wrap)?;
        let mut acc = EnsembleAccumulator::new(grid.clone());
        acc.accumulate_values(&values);
        accs.push(acc);
        partitions.push(vec![PartitionSample { log_z: log_partition(&s, case.beta), log_z2: log_partition(&s, 2.0 * case.beta) }]);
    }
    Ok(Partial { accs, partitions })
}

fn reduce(
    config: &GoeConfig,
    filters: &[Option<Filter>],
    cases: &[Case],
    grid: &TimeGrid,
    lo: u64,
    hi: u64,
) -> Result<Partial> {
    if hi - lo == 1 {
        return leaf(config, filters, cases, grid, lo);
    }
    let mid = lo + (hi - lo) / 2;
    let (a, b) = rayon::join(
        || reduce(config, filters, cases, grid, lo, mid),
        || reduce(config, filters, cases, grid, mid, hi),
    );
    // The left error wins, so the reported index is the smallest failing one.
    let (a, b) = (a?, b?);
    Ok(a.merge(b)?)
}

/// Samples `config.count()` realizations once and evaluates every case on each.
pub fn run_cases(config: &GoeConfig, cases: &[Case], grid: &TimeGrid, workers: usize) -> Result<EnsembleRun> {
    if cases.is_empty() {
        return Err(LabError::Validation("no cases to run".into()));
    }
    let filters = cases.iter().map(|c| c.filter.as_ref().map(FilterSpec::build).transpose()).collect::<Result<Vec<_>>>()?;
    for c in cases {
        if !(c.beta >= 0.0 && c.beta.is_finite()) {
            return Err(LabError::Validation(format!("beta must be finite and >= 0, got {}", c.beta)));
        }
    }
    let part = pool(workers)?.install(|| reduce(config, &filters, cases, grid, 0, config.count()))?;
    Ok(EnsembleRun {
        config: *config,
        grid: grid.clone(),
        cases: cases.to_vec(),
        accumulators: part.accs,
        partitions: part.partitions,
    })
}

/// Single-case convenience wrapper around [`run_cases`].
pub fn run_ensemble(config: &GoeConfig, beta: f64, filter: Option<&FilterSpec>, grid: &TimeGrid, workers: usize) -> Result<CaseResult> {
    let case = Case { beta, filter: filter.cloned() };
    Ok(run_cases(config, &[case], grid, workers)?.case(0))
}

/// Long-time `⟨SFF²⟩/⟨SFF⟩²` predicted from the partition functions:
/// `⟨Z(2β)²/Z(β)⁴⟩ / ⟨Z(2β)/Z(β)²⟩²` for frequency filters.
pub fn frequency_plateau_ratio(p: &[PartitionSample]) -> f64 {
    let x: Vec<f64> = p.iter().map(|s| (s.log_z2 - 2.0 * s.log_z).exp()).collect();
    moment_ratio(&x)
}

/// `⟨1/Z(β)²⟩ / ⟨1/Z(β)⟩²` for eigenvalue filters.
pub fn eigenvalue_plateau_ratio(p: &[PartitionSample]) -> f64 {
    // Scale-free, so shift by the mean log to stay in range.
    let shift = p.iter().map(|s| s.log_z).sum::<f64>() / p.len() as f64;
    let x: Vec<f64> = p.iter().map(|s| (shift - s.log_z).exp()).collect();
    moment_ratio(&x)
}

fn moment_ratio(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m1 = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| v * v).sum::<f64>() / n;
    m2 / (m1 * m1)
}
