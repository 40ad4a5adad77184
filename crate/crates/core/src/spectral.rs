//! Partition functions, the spectral form factor, and ensemble statistics.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::Spectrum;
use crate::math::{self, CompensatedSum};
use crate::{Error, Result};

/// Inverse temperature `β ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct InverseTemp(f64);

impl InverseTemp {
    pub fn new(beta: f64) -> Result<Self> {
        if beta >= 0.0 && beta.is_finite() {
            Ok(Self(beta))
        } else {
            Err(Error::InvalidParameter(format!("inverse temperature must be finite and >= 0, got {beta}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for InverseTemp {
    type Error = Error;
    fn try_from(b: f64) -> Result<Self> {
        Self::new(b)
    }
}

impl From<InverseTemp> for f64 {
    fn from(b: InverseTemp) -> f64 {
        b.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Linear,
    Custom,
}

/// Strictly increasing, non-negative sample times. Cheap to clone.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Arc<Vec<f64>>,
    spacing: Spacing,
    hash: u64,
}

impl TimeGrid {
    /// `points` log-spaced times on `[t_min, t_max]`, both ends included.
    pub fn log(points: usize, t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min && points >= 2) {
            return Err(Error::InvalidParameter(format!(
                "log grid needs 0 < t_min < t_max and >= 2 points, got [{t_min}, {t_max}] x {points}"
            )));
        }
        let (a, b) = (libm::log10(t_min), libm::log10(t_max));
        let times = (0..points)
            .map(|i| {
                if i == points - 1 {
                    t_max
                } else {
                    libm::pow(10.0, a + (b - a) * i as f64 / (points - 1) as f64)
                }
            })
            .collect();
        Self::build(times, Spacing::Log)
    }

    /// `points` evenly spaced times on `[t_min, t_max]`, both ends included.
    pub fn linear(points: usize, t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_min >= 0.0 && t_max > t_min && points >= 2) {
            return Err(Error::InvalidParameter(format!(
                "linear grid needs 0 <= t_min < t_max and >= 2 points, got [{t_min}, {t_max}] x {points}"
            )));
        }
        let h = (t_max - t_min) / (points - 1) as f64;
        let times = (0..points).map(|i| if i == points - 1 { t_max } else { t_min + h * i as f64 }).collect();
        Self::build(times, Spacing::Linear)
    }

    pub fn custom(times: Vec<f64>) -> Result<Self> {
        Self::build(times, Spacing::Custom)
    }

    /// 400 log-spaced points on `[1e-2, 1e4]`.
    pub fn default_log() -> Self {
        Self::log(400, 1e-2, 1e4).expect("static grid")
    }

    fn build(times: Vec<f64>, spacing: Spacing) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidParameter("empty time grid".into()));
        }
        if !(times[0] >= 0.0) || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("grid times must be finite and >= 0".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("grid times must be strictly increasing".into()));
        }
        let hash = grid_hash(&times);
        Ok(Self { times: Arc::new(times), spacing, hash })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    /// FNV-1a over the bit patterns of the times.
    pub fn hash(&self) -> u64 {
        self.hash
    }

    /// Indices of the final decade `t ≥ t_max / 10`. Fails when the grid
    /// does not reach back that far.
    pub fn final_decade(&self) -> Result<core::ops::Range<usize>> {
        let t_min = self.times[0];
        let t_max = self.times[self.times.len() - 1];
        if t_min > t_max / 10.0 {
            return Err(Error::GridTooShort { t_min, t_max });
        }
        let start = self.times.partition_point(|&t| t < t_max / 10.0);
        Ok(start..self.times.len())
    }
}

fn grid_hash(times: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for t in times {
        for b in t.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Normalized Boltzmann weights `e^{−βE_n}/Z(β)`, computed with the
/// exponent shifted by the ground level.
pub fn gibbs_weights(s: &Spectrum, beta: f64) -> Vec<f64> {
    let e0 = if beta >= 0.0 { s.min() } else { s.max() };
    let raw: Vec<f64> = s.values().iter().map(|&e| math::exp(-beta * (e - e0))).collect();
    let z = math::sum(&raw);
    raw.into_iter().map(|w| w / z).collect()
}

/// `log Z(β)` for real `β`.
pub fn log_partition(s: &Spectrum, beta: f64) -> f64 {
    let exps: Vec<f64> = s.values().iter().map(|&e| -beta * e).collect();
    math::log_sum_exp(&exps)
}

/// `Z(β + it)` in polar-log form: `Z = exp(log_abs) · e^{i·phase}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub log_abs: f64,
    pub phase: f64,
}

impl LogComplex {
    pub fn to_complex(self) -> Complex64 {
        math::cis(self.phase) * math::exp(self.log_abs)
    }
}

/// `Σ_n exp(−(β + it)E_n)` in log-magnitude/phase form. Never overflows.
pub fn partition_function_log(s: &Spectrum, beta: f64, t: f64) -> LogComplex {
    let shift = s.values().iter().map(|&e| -beta * e).fold(f64::NEG_INFINITY, f64::max);
    let mut re = CompensatedSum::default();
    let mut im = CompensatedSum::default();
    for &e in s.values() {
        let z = math::cis(-t * e) * math::exp(-beta * e - shift);
        re.add(z.re);
        im.add(z.im);
    }
    let z = Complex64::new(re.value(), im.value());
    LogComplex { log_abs: shift + math::ln(z.norm()), phase: libm::atan2(z.im, z.re) }
}

/// `Z(β + it) = Σ_n exp(−(β + it)E_n)`. May overflow for extreme
/// `β·E_min`; use [`partition_function_log`] in that regime.
pub fn partition_function(s: &Spectrum, beta: f64, t: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(math::exp(log_partition(s, beta)), 0.0);
    }
    partition_function_log(s, beta, t).to_complex()
}

/// `|Σ_n p_n e^{−itE_n}|²` for normalized weights `p`.
pub(crate) fn weighted_return(weights: &[f64], s: &Spectrum, t: f64) -> f64 {
    let mut re = CompensatedSum::default();
    let mut im = CompensatedSum::default();
    for (&p, &e) in weights.iter().zip(s.values()) {
        let (sn, cs) = libm::sincos(t * e);
        re.add(p * cs);
        im.add(-p * sn);
    }
    let (r, i) = (re.value(), im.value());
    r * r + i * i
}

/// Spectral form factor `|Z(β + it)/Z(β)|²`, clamped to `[0, 1]`.
pub fn sff(s: &Spectrum, beta: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let p = gibbs_weights(s, beta);
    weighted_return(&p, s, t).clamp(0.0, 1.0)
}

/// SFF over a whole grid.
pub fn sff_curve(s: &Spectrum, beta: f64, grid: &TimeGrid) -> SffCurve {
    let p = gibbs_weights(s, beta);
    let values = grid
        .times()
        .iter()
        .map(|&t| if t == 0.0 { 1.0 } else { weighted_return(&p, s, t).clamp(0.0, 1.0) })
        .collect();
    SffCurve { grid: grid.clone(), values }
}

pub const MAX_STATE_DIM: usize = 256;

/// Survival probability of the evolved coherent Gibbs state, built as an
/// explicit state vector. Agrees with [`sff`] to round-off.
pub fn sff_state_check(s: &Spectrum, beta: f64, t: f64) -> Result<f64> {
    if s.dim() > MAX_STATE_DIM {
        return Err(Error::DimensionTooLarge { dim: s.dim(), max: MAX_STATE_DIM });
    }
    let p = gibbs_weights(s, beta);
    let psi0: Vec<Complex64> = p.iter().map(|&w| Complex64::new(math::sqrt(w), 0.0)).collect();
    let psi_t: Vec<Complex64> = psi0.iter().zip(s.values()).map(|(a, &e)| a * math::cis(-t * e)).collect();
    let overlap: Complex64 = psi0.iter().zip(&psi_t).map(|(a, b)| a.conj() * b).sum();
    Ok(overlap.norm_sqr())
}

/// `k`-th moment of the SFF, `SFF^k`, valid because the initial state is pure.
pub fn sff_moment(s: &Spectrum, beta: f64, t: f64, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("moment order must be >= 1".into()));
    }
    Ok(libm::pow(sff(s, beta, t), k as f64))
}

/// Energy variance under the Boltzmann weights `e^{−βE}/Z(β)`.
pub fn thermal_energy_variance(s: &Spectrum, beta: f64) -> f64 {
    let p = gibbs_weights(s, beta);
    let mean = math::sum(&p.iter().zip(s.values()).map(|(w, e)| w * e).collect::<Vec<_>>());
    math::sum(&p.iter().zip(s.values()).map(|(w, e)| w * (e - mean) * (e - mean)).collect::<Vec<_>>())
}

/// A curve sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SffCurve {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl SffCurve {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        Ok(Self { grid, values })
    }
}

/// Running per-time sums of SFF and SFF² over realizations.
///
/// Sums are Neumaier-compensated and accumulators merge field-wise, so a
/// fixed reduction tree produces identical bits for any worker count.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAccumulator {
    grid: TimeGrid,
    sum_sff: Vec<CompensatedSum>,
    sum_sff_sq: Vec<CompensatedSum>,
    count: u64,
}

impl EnsembleAccumulator {
    pub fn new(grid: TimeGrid) -> Self {
        let n = grid.len();
        Self { grid, sum_sff: vec![CompensatedSum::default(); n], sum_sff_sq: vec![CompensatedSum::default(); n], count: 0 }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Absorbs one realization.
    pub fn accumulate(&mut self, curve: &SffCurve) -> Result<()> {
        if curve.grid.hash() != self.grid.hash() || curve.grid.len() != self.grid.len() {
            return Err(Error::GridMismatch { expected: self.grid.hash(), found: curve.grid.hash() });
        }
        self.accumulate_values(&curve.values);
        Ok(())
    }

    /// Absorbs raw values already known to live on this accumulator's grid.
    pub fn accumulate_values(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.grid.len(), "values must match the grid length");
        for ((s, s2), &v) in self.sum_sff.iter_mut().zip(self.sum_sff_sq.iter_mut()).zip(values) {
            s.add(v);
            s2.add(v * v);
        }
        self.count += 1;
    }

    /// Field-wise sum of two accumulators on the same grid.
    pub fn merge(&mut self, other: &EnsembleAccumulator) -> Result<()> {
        if other.grid.hash() != self.grid.hash() {
            return Err(Error::GridMismatch { expected: self.grid.hash(), found: other.grid.hash() });
        }
        for (a, b) in self.sum_sff.iter_mut().zip(&other.sum_sff) {
            a.merge(b);
        }
        for (a, b) in self.sum_sff_sq.iter_mut().zip(&other.sum_sff_sq) {
            a.merge(b);
        }
        self.count += other.count;
        Ok(())
    }

    pub fn sum_sff(&self) -> Vec<f64> {
        self.sum_sff.iter().map(CompensatedSum::value).collect()
    }

    pub fn sum_sff_sq(&self) -> Vec<f64> {
        self.sum_sff_sq.iter().map(CompensatedSum::value).collect()
    }

    /// `⟨SFF⟩` per time.
    pub fn mean(&self) -> SffCurve {
        let n = self.count as f64;
        SffCurve { grid: self.grid.clone(), values: self.sum_sff.iter().map(|s| s.value() / n).collect() }
    }

    /// `⟨SFF²⟩` per time.
    pub fn mean_sq(&self) -> SffCurve {
        let n = self.count as f64;
        SffCurve { grid: self.grid.clone(), values: self.sum_sff_sq.iter().map(|s| s.value() / n).collect() }
    }
}

/// Relative variance per time; `None` where `⟨SFF⟩ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RvCurve {
    pub grid: TimeGrid,
    pub values: Vec<Option<f64>>,
}

/// `(⟨SFF²⟩ − ⟨SFF⟩²)/⟨SFF⟩²` per time.
pub fn relative_variance(acc: &EnsembleAccumulator) -> Result<RvCurve> {
    if acc.count < 2 {
        return Err(Error::SingletonEnsemble(acc.count));
    }
    let m = acc.mean();
    let m2 = acc.mean_sq();
    let values = m
        .values
        .iter()
        .zip(&m2.values)
        .map(|(&a, &b)| if a > 0.0 { Some((b - a * a) / (a * a)) } else { None })
        .collect();
    Ok(RvCurve { grid: acc.grid.clone(), values })
}

/// Annealed plateau `⟨Z(2β)⟩ / ⟨Z(β)⟩²` over an ensemble, evaluated in the
/// log domain.
pub fn annealed_plateau(spectra: &[Spectrum], beta: f64) -> Result<f64> {
    if spectra.is_empty() {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    }
    let n = spectra.len() as f64;
    let l2: Vec<f64> = spectra.iter().map(|s| log_partition(s, 2.0 * beta)).collect();
    let l1: Vec<f64> = spectra.iter().map(|s| log_partition(s, beta)).collect();
    let log_mean2 = math::log_sum_exp(&l2) - math::ln(n);
    let log_mean1 = math::log_sum_exp(&l1) - math::ln(n);
    Ok(math::exp(log_mean2 - 2.0 * log_mean1))
}

/// Quenched plateau `⟨Z(2β)/Z(β)²⟩`.
pub fn quenched_plateau(spectra: &[Spectrum], beta: f64) -> Result<f64> {
    if spectra.is_empty() {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    }
    let r: Vec<f64> = spectra.iter().map(|s| single_plateau(s, beta)).collect();
    Ok(math::mean(&r))
}

/// `Z(2β)/Z(β)²` for one spectrum: the long-time SFF without degeneracies.
pub fn single_plateau(s: &Spectrum, beta: f64) -> f64 {
    math::exp(log_partition(s, 2.0 * beta) - 2.0 * log_partition(s, beta))
}

/// Mean of `values` over the final decade of `grid`.
pub fn plateau_estimate(grid: &TimeGrid, values: &[f64]) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
    }
    let r = grid.final_decade()?;
    Ok(math::mean(&values[r]))
}

/// Mean of the defined RV values over the final decade.
pub fn rv_plateau(rv: &RvCurve) -> Result<f64> {
    let r = rv.grid.final_decade()?;
    let defined: Vec<f64> = rv.values[r].iter().flatten().copied().collect();
    if defined.is_empty() {
        return Err(Error::InvalidParameter("relative variance undefined over the final decade".into()));
    }
    Ok(math::mean(&defined))
}

/// Dip time of a filtered ensemble: earliest grid time of the RV maximum.
pub fn dip_time(rv: &RvCurve) -> Result<f64> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in rv.values.iter().enumerate() {
        if let Some(v) = *v {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    best.map(|(i, _)| rv.grid.times()[i])
        .ok_or_else(|| Error::InvalidParameter("relative variance undefined everywhere".into()))
}

/// Dip time of an unfiltered ensemble: earliest grid time of the `⟨SFF⟩`
/// minimum.
pub fn dip_time_of_mean(mean: &SffCurve) -> f64 {
    let mut best = 0;
    for (i, &v) in mean.values.iter().enumerate() {
        if v < mean.values[best] {
            best = i;
        }
    }
    mean.grid.times()[best]
}

/// Characteristic function `1 + (e^{iθ} − 1)·SFF` of the projector onto
/// the initial state, a Bernoulli variable with success probability SFF.
pub fn bernoulli_char(sff_value: f64, theta: f64) -> Result<Complex64> {
    if !(0.0..=1.0).contains(&sff_value) {
        return Err(Error::InvalidParameter(format!("SFF value {sff_value} outside [0, 1]")));
    }
    Ok(Complex64::new(1.0, 0.0) + (math::cis(theta) - Complex64::new(1.0, 0.0)) * sff_value)
}

/// Relative variance `(1 − SFF)/SFF` of the Bernoulli projector outcome;
/// `None` when `SFF = 0`.
pub fn projector_rv(sff_value: f64) -> Result<Option<f64>> {
    if !(0.0..=1.0).contains(&sff_value) {
        return Err(Error::InvalidParameter(format!("SFF value {sff_value} outside [0, 1]")));
    }
    Ok((sff_value > 0.0).then(|| (1.0 - sff_value) / sff_value))
}
