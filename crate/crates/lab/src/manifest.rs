//! Config-driven runs that leave a manifest of everything they wrote.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{LabError, Result};
use crate::formats::{sha256_hex, to_json_pretty, write_file, CurveTable};
use crate::run::{run_cases, Case, CaseResult};
use crate::svg::{render, Series};

pub const TOOL_VERSION: &str = concat!("sff-lab ", env!("CARGO_PKG_VERSION"));
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub base_seed: u64,
    pub tool_version: String,
    /// File name -> sha256 of its bytes.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(config: RunConfig) -> Self {
        let base_seed = config.ensemble.base_seed;
        Self { config, base_seed, tool_version: TOOL_VERSION.to_string(), outputs: BTreeMap::new() }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(LabError::io(path))?;
        serde_json::from_str(&text).map_err(LabError::json(path.display().to_string()))
    }

    /// Writes `contents` under `dir` and records its digest.
    pub fn emit(&mut self, dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
        let path = dir.join(name);
        write_file(&path, contents)?;
        self.outputs.insert(name.to_string(), sha256_hex(contents.as_bytes()));
        Ok(path)
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        write_file(&path, &to_json_pretty(self, "manifest")?)?;
        Ok(path)
    }
}

/// Every (β, filter) pair of a config, β-major.
pub fn cases_of(config: &RunConfig) -> Vec<Case> {
    let filters = config.filters();
    config
        .betas
        .iter()
        .flat_map(|&beta| filters.iter().map(move |f| Case { beta, filter: f.clone() }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(LabError::Validation(format!("unknown format '{other}' (csv, json, svg)"))),
        }
    }
}

/// Two-series log-log plot of one curve: mean SFF solid, RV dashed.
pub fn curve_svg(title: &str, table: &CurveTable) -> String {
    let sff = Series::new("mean SFF", false, &table.t, table.sff_mean.iter().map(|&v| Some(v)));
    let rv = Series::new("RV", true, &table.t, table.rv.iter().copied());
    render(title, "t", &[sff, rv])
}

/// Writes each labelled curve in `format`; an empty list writes nothing.
pub fn export(curves: &[(String, CurveTable)], format: Format, dir: &Path, manifest: &mut RunManifest) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::with_capacity(curves.len());
    for (label, table) in curves {
        let (name, body) = match format {
            Format::Csv => (format!("{label}.csv"), table.to_csv()),
            Format::Json => (format!("{label}.json"), to_json_pretty(table, label)?),
            Format::Svg => (format!("{label}.svg"), curve_svg(label, table)),
        };
        paths.push(manifest.emit(dir, &name, &body)?);
    }
    Ok(paths)
}

/// Runs every case of `config`, writes one CSV per case plus the manifest.
pub fn execute(config: &RunConfig, dir: &Path, workers: usize) -> Result<(RunManifest, Vec<CaseResult>)> {
    config.validate()?;
    let goe = config.ensemble.goe()?;
    let grid = config.grid.build()?;
    let cases = cases_of(config);
    let results = run_cases(&goe, &cases, &grid, workers)?.results();
    let mut manifest = RunManifest::new(config.clone());
    let curves: Vec<(String, CurveTable)> = results.iter().map(|r| (r.case.label(), CurveTable::from_result(r))).collect();
    export(&curves, Format::Csv, dir, &mut manifest)?;
    manifest.save(dir)?;
    Ok((manifest, results))
}

/// Re-runs a manifest's config into `dir` and lists outputs whose digest
/// differs from the recorded one.
pub fn replay(manifest: &RunManifest, dir: &Path, workers: usize) -> Result<Vec<String>> {
    let (fresh, _) = execute(&manifest.config, dir, workers)?;
    let mut mismatched: Vec<String> = manifest
        .outputs
        .iter()
        .filter(|(name, digest)| fresh.outputs.get(*name) != Some(digest))
        .map(|(name, _)| name.clone())
        .collect();
    mismatched.extend(fresh.outputs.keys().filter(|k| !manifest.outputs.contains_key(*k)).cloned());
    Ok(mismatched)
}
