//! Dimension and temperature sweeps of the long-time plateaus.

use serde::{Deserialize, Serialize};
use sff_core::ensembles::GoeConfig;
use sff_core::spectral::{plateau_estimate, rv_plateau, TimeGrid};

use crate::config::FilterSpec;
use crate::error::{LabError, Result};
use crate::formats::fmt_f64;
use crate::run::{run_cases, Case, CaseResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub dim: usize,
    pub beta: f64,
    pub filter: String,
    pub rv_plateau: f64,
    pub sff_plateau: f64,
}

/// One row per (dim, β, filter).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub dims: Vec<usize>,
    pub rows: Vec<ScalingRow>,
}

impl ScalingResult {
    pub fn rows_for<'a>(&'a self, beta: f64, filter: &'a str) -> impl Iterator<Item = &'a ScalingRow> + 'a {
        self.rows.iter().filter(move |r| r.beta == beta && r.filter == filter)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,beta,filter,rv_plateau,sff_plateau\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.dim, r.beta, r.filter, fmt_f64(r.rv_plateau), fmt_f64(r.sff_plateau)));
        }
        out
    }
}

/// Final-decade plateaus of one case.
pub fn plateaus(r: &CaseResult) -> Result<(f64, f64)> {
    let rv = r.rv.as_ref().ok_or_else(|| LabError::Validation("plateau needs at least two realizations".into()))?;
    Ok((rv_plateau(rv)?, plateau_estimate(&r.mean.grid, &r.mean.values)?))
}

fn filter_label(f: &Option<FilterSpec>) -> String {
    f.as_ref().map_or_else(|| "none".to_string(), FilterSpec::label)
}

/// Runs `base` at every dimension in `dims` (ascending). Realizations share
/// their seed across dimensions, and GOE draws are prefix-nested, so the
/// comparison between dimensions uses common random numbers.
pub fn scan_dimension(
    base: &GoeConfig,
    dims: &[usize],
    betas: &[f64],
    filters: &[Option<FilterSpec>],
    grid: &TimeGrid,
    workers: usize,
) -> Result<ScalingResult> {
    if dims.is_empty() || dims.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::Validation(format!("dims must be non-empty and strictly ascending, got {dims:?}")));
    }
    let cases: Vec<Case> =
        betas.iter().flat_map(|&beta| filters.iter().map(move |f| Case { beta, filter: f.clone() })).collect();
    let mut rows = Vec::with_capacity(dims.len() * cases.len());
    for &dim in dims {
        let run = run_cases(&base.with_dim(dim)?, &cases, grid, workers)?;
        for r in run.results() {
            let (rv, sff) = plateaus(&r)?;
            rows.push(ScalingRow { dim, beta: r.case.beta, filter: filter_label(&r.case.filter), rv_plateau: rv, sff_plateau: sff });
        }
    }
    Ok(ScalingResult { dims: dims.to_vec(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sff_core::filters::DeformationFn;

    #[test]
    fn one_row_per_triple() {
        let base = GoeConfig::unit(4, 20, 1).unwrap();
        let grid = TimeGrid::log(40, 0.1, 1e3).unwrap();
        let f = FilterSpec::from_name("freq-gauss", Some(0.2), None, DeformationFn::Identity).unwrap();
        let res = scan_dimension(&base, &[4, 6], &[0.1, 0.5], &[None, f], &grid, 1).unwrap();
        assert_eq!(res.rows.len(), 2 * 2 * 2);
        assert_eq!(res.rows_for(0.5, "freq-gauss_k0.2").count(), 2);
        assert!(res.to_csv().lines().count() == 9);
        assert!(scan_dimension(&base, &[8, 4], &[0.1], &[None], &grid, 1).is_err());
    }
}
