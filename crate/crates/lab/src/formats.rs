//! On-disk formats: curve CSV/JSON, spectra JSON, signal CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sff_core::ensembles::{sample_spectrum, GoeConfig};
use sff_core::recovery::SampledSignal;

use crate::error::{LabError, Result};
use crate::run::CaseResult;

pub const CURVE_HEADER: &str = "t,sff_mean,sff_sq_mean,rv";
pub const SIGNAL_HEADER: &str = "t,value";

/// 17 significant digits: enough to round-trip any binary64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Ensemble curve as stored in CSV. `rv` is `NaN` where undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub t: Vec<f64>,
    pub sff_mean: Vec<f64>,
    pub sff_sq_mean: Vec<f64>,
    pub rv: Vec<Option<f64>>,
}

impl CurveTable {
    pub fn from_result(r: &CaseResult) -> Self {
        let n = r.mean.values.len();
        Self {
            t: r.mean.grid.times().to_vec(),
            sff_mean: r.mean.values.clone(),
            sff_sq_mean: r.mean_sq.values.clone(),
            rv: r.rv.as_ref().map_or_else(|| vec![None; n], |rv| rv.values.clone()),
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(80 * (self.len() + 1));
        out.push_str(CURVE_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            let rv = self.rv[i].map_or_else(|| "NaN".to_string(), fmt_f64);
            let _ = writeln!(out, "{},{},{},{}", fmt_f64(self.t[i]), fmt_f64(self.sff_mean[i]), fmt_f64(self.sff_sq_mean[i]), rv);
        }
        out
    }

    pub fn from_csv(text: &str, path: &Path) -> Result<Self> {
        let rows = parse_csv(text, path, CURVE_HEADER, 4)?;
        let mut table = CurveTable { t: vec![], sff_mean: vec![], sff_sq_mean: vec![], rv: vec![] };
        for r in rows {
            table.t.push(r[0]);
            table.sff_mean.push(r[1]);
            table.sff_sq_mean.push(r[2]);
            table.rv.push(if r[3].is_nan() { None } else { Some(r[3]) });
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(LabError::io(path))?;
        Self::from_csv(&text, path)
    }
}

fn parse_csv(text: &str, path: &Path, header: &str, cols: usize) -> Result<Vec<Vec<f64>>> {
    let err = |line: usize, message: String| LabError::Parse { path: path.to_path_buf(), line, message };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == header => {}
        other => return Err(err(1, format!("expected header '{header}', found {other:?}"))),
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<f64>().map_err(|e| err(k + 2, format!("'{f}': {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != cols {
            return Err(err(k + 2, format!("expected {cols} fields, found {}", row.len())));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn signal_to_csv(s: &SampledSignal) -> String {
    let mut out = String::from(SIGNAL_HEADER);
    out.push('\n');
    for (t, v) in s.times().iter().zip(s.values()) {
        let _ = writeln!(out, "{},{}", fmt_f64(*t), fmt_f64(*v));
    }
    out
}

/// Reads a `t,value` CSV; times must be uniformly spaced.
pub fn signal_from_csv(text: &str, path: &Path) -> Result<SampledSignal> {
    let rows = parse_csv(text, path, SIGNAL_HEADER, 2)?;
    if rows.len() < 2 {
        return Err(LabError::Validation(format!("{}: a signal needs at least two samples", path.display())));
    }
    let t0 = rows[0][0];
    let dt = rows[1][0] - t0;
    for (j, r) in rows.iter().enumerate() {
        let expect = t0 + j as f64 * dt;
        if (r[0] - expect).abs() > 1e-9 * dt.abs().max(expect.abs()) {
            return Err(LabError::Parse { path: path.to_path_buf(), line: j + 2, message: "times are not uniformly spaced".into() });
        }
    }
    Ok(SampledSignal::new(t0, dt, rows.iter().map(|r| r[1]).collect())?)
}

/// Sampled spectra, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectraFile {
    pub dim: usize,
    pub sigma: f64,
    pub base_seed: u64,
    pub spectra: Vec<Vec<f64>>,
}

impl SpectraFile {
    pub fn sample(config: &GoeConfig) -> Result<Self> {
        let spectra = (0..config.count())
            .map(|i| {
                sample_spectrum(config, i)
                    .map(|s| s.values().to_vec())
                    .map_err(|source| LabError::Realization { index: i, source })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim: config.dim(), sigma: config.sigma(), base_seed: config.base_seed(), spectra })
    }
}

pub fn to_json_pretty<T: Serialize>(value: &T, what: &str) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(LabError::json(what))?;
    s.push('\n');
    Ok(s)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(LabError::io(dir))?;
        }
    }
    fs::write(path, contents).map_err(LabError::io(path))
}
