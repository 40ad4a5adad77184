//! Hamiltonian ensembles and their spectra.
//!
//! GOE matrices are drawn as `H = (X + Xᵀ)/2` with i.i.d. `N(0, σ²)` entries
//! in `X`. Entries of `X` are drawn in shell order: for `k = 0, 1, …` the
//! new row `X[k][0..k]`, then the new column `X[0..k][k]`, then `X[k][k]`.
//! Consequently the leading `d×d` block of a sample of dimension `D ≥ d` is
//! exactly the `d`-dimensional sample of the same `(base_seed, index)`,
//! which couples dimension sweeps through common random numbers.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, SymmetricEigen};
use crate::rng::{realization_rng, NormalSampler};
use crate::{Error, Result};

/// Parameters of a GOE run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoeConfig {
    dim: usize,
    sigma: f64,
    count: u64,
    base_seed: u64,
}

impl GoeConfig {
    pub fn new(dim: usize, sigma: f64, count: u64, base_seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("dim must be >= 2, got {dim}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        if count == 0 {
            return Err(Error::InvalidParameter("count must be >= 1".into()));
        }
        Ok(Self { dim, sigma, count, base_seed })
    }

    /// `σ = 1`, the value used throughout the figure recipes.
    pub fn unit(dim: usize, count: u64, base_seed: u64) -> Result<Self> {
        Self::new(dim, 1.0, count, base_seed)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(dim, self.sigma, self.count, self.base_seed)
    }

    pub fn with_count(&self, count: u64) -> Result<Self> {
        Self::new(self.dim, self.sigma, count, self.base_seed)
    }
}

/// Real symmetric matrix, row-major. Symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymmetricMatrix {
    /// Builds from a full row-major array, rejecting anything that is not
    /// exactly symmetric or not finite.
    pub fn from_row_major(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        for i in 0..dim {
            for j in 0..i {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return Err(Error::InvalidParameter(format!("entry ({i},{j}) breaks symmetry")));
                }
            }
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        Ok(Self { dim, entries })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut entries = vec![0.0; dim * dim];
        for (i, &v) in values.iter().enumerate() {
            entries[i * dim + i] = v;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Ascending, finite eigenvalues of one Hamiltonian realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    /// Sorts the values ascending; rejects empty or non-finite input.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("spectrum must be non-empty".into()));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("spectrum contains non-finite values".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { eigenvalues: values })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `max − min`.
    pub fn spread(&self) -> f64 {
        self.max() - self.min()
    }

    /// Maps each level through `f`; the result is re-sorted.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.eigenvalues.iter().map(|&e| f(e)).collect())
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.eigenvalues
    }
}

/// Draws realization `index` of the GOE described by `config`.
///
/// The draw stream depends only on `(base_seed, index)`; see the module
/// docs for the shell-order layout.
pub fn sample_goe(config: &GoeConfig, index: u64) -> Result<SymmetricMatrix> {
    if index >= config.count {
        return Err(Error::InvalidParameter(format!(
            "realization {index} out of range (count {})",
            config.count
        )));
    }
    Ok(sample_goe_unchecked(config.dim, config.sigma, config.base_seed, index))
}

pub(crate) fn sample_goe_unchecked(d: usize, sigma: f64, base_seed: u64, index: u64) -> SymmetricMatrix {
    let mut rng = realization_rng(base_seed, index);
    let mut normal = NormalSampler::new();
    let mut x = vec![0.0; d * d];
    for k in 0..d {
        for j in 0..k {
            x[k * d + j] = sigma * normal.sample(&mut rng);
        }
        for i in 0..k {
            x[i * d + k] = sigma * normal.sample(&mut rng);
        }
        x[k * d + k] = sigma * normal.sample(&mut rng);
    }
    let mut h = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let v = 0.5 * (x[i * d + j] + x[j * d + i]);
            h[i * d + j] = v;
            h[j * d + i] = v;
        }
    }
    SymmetricMatrix { dim: d, entries: h }
}

/// Ascending eigenvalues of `m`.
pub fn eigenvalues(m: &SymmetricMatrix) -> Result<Spectrum> {
    let eig = linalg::symmetric_eigen(&m.entries, m.dim, false)?;
    Ok(Spectrum { eigenvalues: eig.values })
}

/// Eigenvalues together with an orthonormal eigenbasis (column `j` of
/// `vectors` belongs to `values[j]`).
pub fn eigen_decompose(m: &SymmetricMatrix) -> Result<SymmetricEigen> {
    linalg::symmetric_eigen(&m.entries, m.dim, true)
}

/// Samples and diagonalizes realization `index`, tagging solver failures
/// with the realization ordinal.
pub fn sample_spectrum(config: &GoeConfig, index: u64) -> Result<Spectrum> {
    let h = sample_goe(config, index)?;
    eigenvalues(&h).map_err(|e| match e {
        Error::EigenNoConvergence { .. } => Error::EigenNoConvergence { index: Some(index) },
        other => other,
    })
}

/// Mean energy and energy variance with uniform weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralStats {
    pub mean: f64,
    pub variance: f64,
}

pub fn spectral_stats(s: &Spectrum) -> SpectralStats {
    let d = s.dim() as f64;
    let mean = crate::math::sum(s.values()) / d;
    let dev: Vec<f64> = s.values().iter().map(|e| (e - mean) * (e - mean)).collect();
    SpectralStats { mean, variance: crate::math::sum(&dev) / d }
}
