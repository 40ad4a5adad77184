//! Run configuration and its JSON schema.
//!
//! ```json
//! {
//!   "ensemble": {"dim": 64, "sigma": 1.0, "count": 500, "base_seed": 0},
//!   "filter": {"domain": "frequency", "kind": "gaussian", "kappa": 0.1, "T": null, "f": {"tag": "identity"}},
//!   "betas": [0.1],
//!   "kappas": [],
//!   "grid": {"spacing": "log", "tmin": 0.01, "tmax": 10000.0, "points": 400}
//! }
//! ```
//!
//! `filter` may be `null` (unfiltered). A non-empty `kappas` list runs the
//! filter once per κ, overriding the filter's own `kappa`.

use serde::{Deserialize, Serialize};
use sff_core::ensembles::GoeConfig;
use sff_core::filters::{DeformationFn, EigenvalueFilter, FrequencyFilter};
use sff_core::spectral::{Spacing, TimeGrid};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Frequency,
    Eigenvalue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Gaussian,
    Window,
    Nojump,
}

/// Filter as written in configs and manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSpec {
    pub domain: Domain,
    pub kind: FilterKind,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(rename = "T", default)]
    pub duration: Option<f64>,
    #[serde(default)]
    pub f: DeformationFn,
}

/// A filter ready to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub enum Filter {
    Frequency(FrequencyFilter),
    Eigenvalue(EigenvalueFilter),
    Nojump { kappa: f64, f: DeformationFn },
}

impl FilterSpec {
    /// CLI names: `none`, `freq-gauss`, `eig-gauss`, `window`, `eig-nojump`.
    pub fn from_name(name: &str, kappa: Option<f64>, duration: Option<f64>, f: DeformationFn) -> Result<Option<Self>> {
        let (domain, kind) = match name {
            "none" => return Ok(None),
            "freq-gauss" => (Domain::Frequency, FilterKind::Gaussian),
            "eig-gauss" => (Domain::Eigenvalue, FilterKind::Gaussian),
            "window" => (Domain::Frequency, FilterKind::Window),
            "eig-nojump" => (Domain::Eigenvalue, FilterKind::Nojump),
            other => return Err(LabError::Validation(format!("unknown filter '{other}'"))),
        };
        let spec = FilterSpec { domain, kind, kappa, duration, f };
        spec.build()?;
        Ok(Some(spec))
    }

    pub fn name(&self) -> &'static str {
        match (self.domain, self.kind) {
            (Domain::Frequency, FilterKind::Gaussian) => "freq-gauss",
            (Domain::Frequency, FilterKind::Window) => "window",
            (Domain::Eigenvalue, FilterKind::Gaussian) => "eig-gauss",
            (Domain::Eigenvalue, FilterKind::Nojump) => "eig-nojump",
            _ => "invalid",
        }
    }

    /// Short label used in file names and tables, e.g. `freq-gauss_k0.1`.
    pub fn label(&self) -> String {
        match (self.kind, self.kappa, self.duration) {
            (FilterKind::Window, _, Some(t)) => format!("{}_T{t}", self.name()),
            (_, Some(k), _) => format!("{}_k{k}", self.name()),
            _ => self.name().to_string(),
        }
    }

    pub fn with_kappa(&self, kappa: f64) -> Self {
        Self { kappa: Some(kappa), ..self.clone() }
    }

    pub fn build(&self) -> Result<Filter> {
        let kappa = || {
            self.kappa.ok_or_else(|| LabError::Validation(format!("filter '{}' needs kappa", self.name())))
        };
        let f = self.f;
        let filter = match (self.domain, self.kind) {
            (Domain::Frequency, FilterKind::Gaussian) => Filter::Frequency(FrequencyFilter::GaussianDephasing { kappa: kappa()?, f }),
            (Domain::Frequency, FilterKind::Window) => {
                let duration = self.duration.ok_or_else(|| LabError::Validation("filter 'window' needs T".into()))?;
                Filter::Frequency(FrequencyFilter::TimeWindow { duration })
            }
            (Domain::Eigenvalue, FilterKind::Gaussian) => Filter::Eigenvalue(EigenvalueFilter::GaussianNojump { kappa: kappa()?, f }),
            (Domain::Eigenvalue, FilterKind::Nojump) => {
                let kappa = kappa()?;
                if !(kappa >= 0.0 && kappa.is_finite()) {
                    return Err(LabError::Validation(format!("kappa must be >= 0, got {kappa}")));
                }
                Filter::Nojump { kappa, f }
            }
            (Domain::Frequency, FilterKind::Nojump) | (Domain::Eigenvalue, FilterKind::Window) => {
                return Err(LabError::Validation(format!("no {:?} filter of kind {:?}", self.domain, self.kind)))
            }
        };
        match &filter {
            Filter::Frequency(w) => w.validate()?,
            Filter::Eigenvalue(w) => w.validate()?,
            Filter::Nojump { .. } => {}
        }
        Ok(filter)
    }
}

/// Parses `identity`, `power:p` or `affine:a:b`.
pub fn parse_deformation(s: &str) -> Result<DeformationFn> {
    let bad = || LabError::Validation(format!("bad --f value '{s}' (identity, power:p, affine:a:b)"));
    let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["identity"] => Ok(DeformationFn::Identity),
        ["power", p] => Ok(DeformationFn::Power { p: num(p)? }),
        ["affine", a, b] => Ok(DeformationFn::Affine { a: num(a)?, b: num(b)? }),
        _ => Err(bad()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSpec {
    pub dim: usize,
    pub sigma: f64,
    pub count: u64,
    pub base_seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self { dim: 64, sigma: 1.0, count: 500, base_seed: 0 }
    }
}

impl EnsembleSpec {
    pub fn goe(&self) -> Result<GoeConfig> {
        Ok(GoeConfig::new(self.dim, self.sigma, self.count, self.base_seed)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub spacing: Spacing,
    pub tmin: f64,
    pub tmax: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { spacing: Spacing::Log, tmin: 1e-2, tmax: 1e4, points: 400 }
    }
}

impl GridSpec {
    pub fn log(points: usize, tmin: f64, tmax: f64) -> Self {
        Self { spacing: Spacing::Log, tmin, tmax, points }
    }

    pub fn build(&self) -> Result<TimeGrid> {
        match self.spacing {
            Spacing::Log => Ok(TimeGrid::log(self.points, self.tmin, self.tmax)?),
            Spacing::Linear => Ok(TimeGrid::linear(self.points, self.tmin, self.tmax)?),
            Spacing::Custom => Err(LabError::Validation("custom grids are not configurable".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub ensemble: EnsembleSpec,
    pub filter: Option<FilterSpec>,
    pub betas: Vec<f64>,
    pub kappas: Vec<f64>,
    pub grid: GridSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { ensemble: EnsembleSpec::default(), filter: None, betas: vec![0.1], kappas: Vec::new(), grid: GridSpec::default() }
    }
}

impl RunConfig {
    /// Every filter the run evaluates: one per κ when `kappas` is set.
    pub fn filters(&self) -> Vec<Option<FilterSpec>> {
        match &self.filter {
            None => vec![None],
            Some(f) if self.kappas.is_empty() => vec![Some(f.clone())],
            Some(f) => self.kappas.iter().map(|&k| Some(f.with_kappa(k))).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ensemble.goe()?;
        self.grid.build()?;
        if self.betas.is_empty() {
            return Err(LabError::Validation("at least one beta is required".into()));
        }
        if let Some(b) = self.betas.iter().find(|b| !(**b >= 0.0 && b.is_finite())) {
            return Err(LabError::Validation(format!("beta must be finite and >= 0, got {b}")));
        }
        for f in self.filters().iter().flatten() {
            f.build()?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(LabError::json("config"))?;
        // A manifest carries its config under "config".
        let inner = match value.get("config") {
            Some(c) if value.get("outputs").is_some() => c.clone(),
            _ => value,
        };
        serde_json::from_value(inner).map_err(LabError::json("config"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_spec_json_shape() {
        let spec = FilterSpec::from_name("freq-gauss", Some(0.1), None, DeformationFn::Identity).unwrap().unwrap();
        let json = serde_json::to_string(&serde_json::json!({ "filter": spec })).unwrap();
        assert_eq!(json, r#"{"filter":{"domain":"frequency","kind":"gaussian","kappa":0.1,"T":null,"f":{"tag":"identity"}}}"#);
        let back: FilterSpec = serde_json::from_str(r#"{"domain":"frequency","kind":"window","T":3.0,"f":{"tag":"power","p":2.0}}"#).unwrap();
        assert_eq!(back.name(), "window");
        assert!(FilterSpec::from_name("window", None, None, DeformationFn::Identity).is_err());
        assert!(FilterSpec::from_name("none", None, None, DeformationFn::Identity).unwrap().is_none());
    }

    #[test]
    fn deformation_parsing() {
        assert_eq!(parse_deformation("power:2").unwrap(), DeformationFn::Power { p: 2.0 });
        assert_eq!(parse_deformation("affine:1:-0.5").unwrap(), DeformationFn::Affine { a: 1.0, b: -0.5 });
        assert!(parse_deformation("power").is_err());
    }

    #[test]
    fn config_defaults_and_kappa_list() {
        let c = RunConfig::from_json(r#"{"filter":{"domain":"eigenvalue","kind":"gaussian","kappa":0.1},"kappas":[0.01,0.1]}"#).unwrap();
        assert_eq!(c.ensemble, EnsembleSpec::default());
        let fs = c.filters();
        assert_eq!(fs.len(), 2);
        assert_eq!(fs[0].as_ref().unwrap().kappa, Some(0.01));
        c.validate().unwrap();
        assert!(RunConfig::from_json(r#"{"bogus":1}"#).is_err());
    }
}
