//! Frequency and eigenvalue filters acting on the spectral form factor.
//!
//! A frequency filter weighs each pair of levels by `w(E_n − E_m)` (or, for
//! a deformation `x = f(E)`, by a function of `x_n − x_m`). An eigenvalue
//! filter weighs each level by `w(E_n) ≥ 0` and renormalizes by the
//! modified partition function `Z_w(β) = Σ_n w(E_n) e^{−βE_n}`.

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::ensembles::Spectrum;
use crate::math::{self, CompensatedSum};
use crate::spectral::gibbs_weights;
use crate::{Error, Result};

/// Exponents below this are flushed to a zero weight (`e^{-690.8} ≈ 1e-300`).
const UNDERFLOW_EXPONENT: f64 = -690.775_527_898_213_7;

/// Deformation `E ↦ f(E)` defining the Lindblad operator `X = f(H)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "tag", rename_all = "lowercase")]
pub enum DeformationFn {
    #[default]
    Identity,
    Power { p: f64 },
    Affine { a: f64, b: f64 },
}

impl DeformationFn {
    pub fn apply(&self, e: f64) -> f64 {
        match *self {
            DeformationFn::Identity => e,
            DeformationFn::Power { p } => math::powf(e, p),
            DeformationFn::Affine { a, b } => a * e + b,
        }
    }

    /// `f` applied to every level; fails if any image is not finite.
    pub fn on_spectrum(&self, s: &Spectrum) -> Result<Vec<f64>> {
        let x: Vec<f64> = s.values().iter().map(|&e| self.apply(e)).collect();
        if let Some(n) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "deformation {self:?} is not finite at level {n} (E = {})",
                s.values()[n]
            )));
        }
        Ok(x)
    }

    /// Whether `|f(E_m) − f(E_n)|` grows with `m` for a sorted spectrum.
    fn is_monotone(&self) -> bool {
        matches!(self, DeformationFn::Identity | DeformationFn::Affine { .. })
    }
}

/// Sampled symmetric filter `w(x)` stored on its `x ≥ 0` half, linearly
/// interpolated and clamped to the end values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    xs: Vec<f64>,
    ws: Vec<f64>,
}

impl FrequencyTable {
    /// `xs` must start at 0, increase strictly, and `ws[0]` must be 1.
    pub fn new(xs: Vec<f64>, ws: Vec<f64>) -> Result<Self> {
        validate_table(&xs, &ws)?;
        if xs[0] != 0.0 {
            return Err(Error::InvalidParameter("frequency table must start at x = 0".into()));
        }
        if ws[0] != 1.0 {
            return Err(Error::InvalidParameter("frequency table needs w(0) = 1 for trace preservation".into()));
        }
        Ok(Self { xs, ws })
    }

    pub fn eval(&self, x: f64) -> f64 {
        interpolate(&self.xs, &self.ws, x.abs())
    }
}

/// Sampled eigenvalue filter `w(E) ≥ 0`, linearly interpolated and clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTable {
    es: Vec<f64>,
    ws: Vec<f64>,
}

impl EnergyTable {
    pub fn new(es: Vec<f64>, ws: Vec<f64>) -> Result<Self> {
        validate_table(&es, &ws)?;
        Ok(Self { es, ws })
    }

    pub fn eval(&self, e: f64) -> f64 {
        interpolate(&self.es, &self.ws, e)
    }
}

fn validate_table(xs: &[f64], ws: &[f64]) -> Result<()> {
    if xs.is_empty() || xs.len() != ws.len() {
        return Err(Error::InvalidParameter("filter table needs matching, non-empty columns".into()));
    }
    if xs.windows(2).any(|p| p[1] <= p[0]) || xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("filter table abscissae must increase strictly".into()));
    }
    if ws.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::InvalidParameter("filter weights must be finite and >= 0".into()));
    }
    Ok(())
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let s = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + s * (ys[i + 1] - ys[i])
}

/// Filters on level differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrequencyFilter {
    /// Energy dephasing: `w = exp[−κ t (x_n − x_m)²]`, time-dependent.
    GaussianDephasing { kappa: f64, #[serde(default)] f: DeformationFn },
    /// Fixed Gaussian `w = exp[−α (x_n − x_m)²]`.
    Gaussian { alpha: f64, #[serde(default)] f: DeformationFn },
    /// Box average over a window of length `T`: `w(ω) = sinc(ωT/2)`.
    TimeWindow { duration: f64 },
    Custom { table: FrequencyTable },
}

impl FrequencyFilter {
    pub fn validate(&self) -> Result<()> {
        match self {
            FrequencyFilter::GaussianDephasing { kappa, .. } if !(*kappa >= 0.0 && kappa.is_finite()) => {
                Err(Error::InvalidParameter(format!("kappa must be >= 0, got {kappa}")))
            }
            FrequencyFilter::Gaussian { alpha, .. } if !(*alpha >= 0.0 && alpha.is_finite()) => {
                Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")))
            }
            FrequencyFilter::TimeWindow { duration } if !(*duration > 0.0 && duration.is_finite()) => {
                Err(Error::InvalidParameter(format!("window length must be > 0, got {duration}")))
            }
            _ => Ok(()),
        }
    }

    fn deformation(&self) -> DeformationFn {
        match self {
            FrequencyFilter::GaussianDephasing { f, .. } | FrequencyFilter::Gaussian { f, .. } => *f,
            _ => DeformationFn::Identity,
        }
    }

    /// Gaussian exponent coefficient at time `t`, if this is a Gaussian.
    fn gaussian_rate(&self, t: f64) -> Option<f64> {
        match *self {
            FrequencyFilter::GaussianDephasing { kappa, .. } => Some(kappa * t),
            FrequencyFilter::Gaussian { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    /// Weight as a function of the deformed difference `Δ = x_n − x_m` at time `t`.
    pub fn weight_of_difference(&self, delta: f64, t: f64) -> f64 {
        if let Some(rate) = self.gaussian_rate(t) {
            let ex = -rate * delta * delta;
            return if ex < UNDERFLOW_EXPONENT { 0.0 } else { math::exp(ex) };
        }
        match self {
            FrequencyFilter::TimeWindow { duration } => math::sinc(0.5 * delta * duration),
            FrequencyFilter::Custom { table } => table.eval(delta),
            _ => unreachable!(),
        }
    }

    /// `w(0)`, which must be 1 for every trace-preserving filter.
    pub fn weight_at_zero(&self) -> f64 {
        self.weight_of_difference(0.0, 1.0)
    }

    /// Taylor coefficients `c_k` of `log w(x) = Σ_{k≥1} c_k x^{2k}` for the
    /// analytic built-ins (identity deformation only), up to `k = terms`.
    pub fn log_series(&self, terms: usize, t: f64) -> Option<Vec<f64>> {
        if self.deformation() != DeformationFn::Identity {
            return None;
        }
        if let Some(rate) = self.gaussian_rate(t) {
            return Some((1..=terms).map(|k| if k == 1 { -rate } else { 0.0 }).collect());
        }
        match self {
            FrequencyFilter::TimeWindow { duration } => {
                let half = 0.5 * duration;
                Some(log_sinc_series(terms)?.iter().enumerate().map(|(i, c)| c * libm::pow(half, 2.0 * (i + 1) as f64)).collect())
            }
            _ => None,
        }
    }
}

/// Coefficients `a_k` of `log(sin u / u) = Σ_{k≥1} a_k u^{2k}`, i.e.
/// `a_k = (−1)^k 2^{2k−1} B_{2k} / (k (2k)!)`, for `k ≤` [`MAX_LOG_SINC_TERMS`].
pub fn log_sinc_series(terms: usize) -> Option<Vec<f64>> {
    if terms > MAX_LOG_SINC_TERMS {
        return None;
    }
    let mut out = Vec::with_capacity(terms);
    let mut fact = 1.0; // (2k)!
    for k in 1..=terms {
        fact *= (2 * k - 1) as f64 * (2 * k) as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out.push(sign * libm::pow(2.0, (2 * k - 1) as f64) * BERNOULLI_EVEN[k - 1] / (k as f64 * fact));
    }
    Some(out)
}

pub const MAX_LOG_SINC_TERMS: usize = 15;

/// `B_2, B_4, …, B_30`.
const BERNOULLI_EVEN: [f64; MAX_LOG_SINC_TERMS] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

/// Filters on individual levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EigenvalueFilter {
    /// No-jump energy dephasing: `w(E; t) = exp[−κ t f(E)²]`.
    GaussianNojump { kappa: f64, #[serde(default)] f: DeformationFn },
    /// Fixed Gaussian `w(E) = exp[−α f(E)²]`.
    Gaussian { alpha: f64, #[serde(default)] f: DeformationFn },
    /// `w(E) = exp(−β' E)`.
    Boltzmann { beta_shift: f64 },
    Custom { table: EnergyTable },
}

impl EigenvalueFilter {
    pub fn validate(&self) -> Result<()> {
        match self {
            EigenvalueFilter::GaussianNojump { kappa, .. } if !(*kappa >= 0.0 && kappa.is_finite()) => {
                Err(Error::InvalidParameter(format!("kappa must be >= 0, got {kappa}")))
            }
            EigenvalueFilter::Gaussian { alpha, .. } if !(*alpha >= 0.0 && alpha.is_finite()) => {
                Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")))
            }
            EigenvalueFilter::Boltzmann { beta_shift } if !beta_shift.is_finite() => {
                Err(Error::InvalidParameter("beta_shift must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// `log w(E; t)`; `-inf` where the filter vanishes.
    pub fn log_weight(&self, e: f64, t: f64) -> f64 {
        match self {
            EigenvalueFilter::GaussianNojump { kappa, f } => {
                let x = f.apply(e);
                -kappa * t * x * x
            }
            EigenvalueFilter::Gaussian { alpha, f } => {
                let x = f.apply(e);
                -alpha * x * x
            }
            EigenvalueFilter::Boltzmann { beta_shift } => -beta_shift * e,
            EigenvalueFilter::Custom { table } => {
                let w = table.eval(e);
                if w > 0.0 {
                    math::ln(w)
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn weight(&self, e: f64, t: f64) -> f64 {
        math::exp(self.log_weight(e, t))
    }

    fn log_weights(&self, s: &Spectrum, t: f64) -> Result<Vec<f64>> {
        self.validate()?;
        let lw: Vec<f64> = s.values().iter().map(|&e| self.log_weight(e, t)).collect();
        if let Some(n) = lw.iter().position(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::InvalidParameter(format!("filter is not finite at level {n}")));
        }
        Ok(lw)
    }
}

/// `(1/Z²) Σ_{nm} e^{−β(E_n+E_m) − it(E_n−E_m)} W_{nm}` for a symmetric pair
/// weight with `W_{nn} = 1`.
fn pair_sum(s: &Spectrum, beta: f64, t: f64, mut weight: impl FnMut(usize, usize) -> f64) -> f64 {
    let p = gibbs_weights(s, beta);
    let e = s.values();
    let mut acc = CompensatedSum::default();
    for n in 0..p.len() {
        acc.add(p[n] * p[n] * weight(n, n));
        let mut row = CompensatedSum::default();
        for m in (n + 1)..p.len() {
            let w = weight(n, m);
            if w != 0.0 {
                row.add(p[m] * w * math::cos(t * (e[n] - e[m])));
            }
        }
        acc.add(2.0 * p[n] * row.value());
    }
    acc.value()
}

/// Frequency-filtered SFF.
pub fn freq_filtered_sff(s: &Spectrum, beta: f64, t: f64, w: &FrequencyFilter) -> Result<f64> {
    w.validate()?;
    let f = w.deformation();
    let x = f.on_spectrum(s)?;
    let p = gibbs_weights(s, beta);
    let e = s.values();

    // Gaussian with a monotone deformation: pair weights only shrink along a
    // row, so the row stops at the first weight that underflows.
    if let (Some(rate), true) = (w.gaussian_rate(t), f.is_monotone()) {
        let mut acc = CompensatedSum::default();
        for n in 0..p.len() {
            acc.add(p[n] * p[n]);
            let mut row = CompensatedSum::default();
            for m in (n + 1)..p.len() {
                let dx = x[m] - x[n];
                let ex = -rate * dx * dx;
                if ex < UNDERFLOW_EXPONENT {
                    break;
                }
                row.add(p[m] * math::exp(ex) * math::cos(t * (e[n] - e[m])));
            }
            acc.add(2.0 * p[n] * row.value());
        }
        return Ok(acc.value().clamp(0.0, 1.0));
    }
    Ok(pair_sum(s, beta, t, |n, m| w.weight_of_difference(x[n] - x[m], t)).clamp(0.0, 1.0))
}

/// Pair weights `w_{nm}` of a frequency filter on a spectrum at time `t`
/// (row-major, `d×d`).
pub fn pair_weights(s: &Spectrum, t: f64, w: &FrequencyFilter) -> Result<Vec<f64>> {
    w.validate()?;
    let x = w.deformation().on_spectrum(s)?;
    let d = s.dim();
    let mut out = alloc::vec![0.0; d * d];
    for n in 0..d {
        for m in 0..d {
            out[n * d + m] = w.weight_of_difference(x[n] - x[m], t);
        }
    }
    Ok(out)
}

/// Generic frequency-filtered double sum with caller-supplied pair weights.
pub fn pair_weighted_sff(s: &Spectrum, beta: f64, t: f64, weights: &[f64]) -> Result<f64> {
    let d = s.dim();
    if weights.len() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, found: weights.len() });
    }
    Ok(pair_sum(s, beta, t, |n, m| weights[n * d + m]))
}

/// SFF averaged over a box window of length `T` centred on `t`.
pub fn time_window_sff(s: &Spectrum, beta: f64, t: f64, duration: f64) -> Result<f64> {
    freq_filtered_sff(s, beta, t, &FrequencyFilter::TimeWindow { duration })
}

/// `log Z_w(β) = log Σ_n w(E_n; t) e^{−βE_n}`.
pub fn log_modified_partition(s: &Spectrum, beta: f64, w: &EigenvalueFilter, t: f64) -> Result<f64> {
    let lw = w.log_weights(s, t)?;
    let ex: Vec<f64> = lw.iter().zip(s.values()).map(|(l, &e)| l - beta * e).collect();
    let lz = math::log_sum_exp(&ex);
    if lz == f64::NEG_INFINITY {
        return Err(Error::PartitionUnderflow);
    }
    Ok(lz)
}

/// Modified partition function `Z_w(β) = Σ_n w(E_n) e^{−βE_n}`.
pub fn modified_partition(s: &Spectrum, beta: f64, w: &EigenvalueFilter, t: f64) -> Result<f64> {
    let z = math::exp(log_modified_partition(s, beta, w, t)?);
    if z == 0.0 {
        return Err(Error::PartitionUnderflow);
    }
    Ok(z)
}

/// `|Σ_n a_n e^{−itE_n}|² / (Σ_n a_n)²` for log-amplitudes `la`.
fn normalized_return(la: &[f64], s: &Spectrum, t: f64) -> Result<f64> {
    let shift = la.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return Err(Error::PartitionUnderflow);
    }
    let a: Vec<f64> = la.iter().map(|l| math::exp(l - shift)).collect();
    let norm = math::sum(&a);
    let p: Vec<f64> = a.iter().map(|x| x / norm).collect();
    Ok(crate::spectral::weighted_return(&p, s, t))
}

/// Eigenvalue-filtered SFF normalized by `Z_w(β)²`, with the filter
/// evaluated at time `t`.
pub fn eig_filtered_sff(s: &Spectrum, beta: f64, t: f64, w: &EigenvalueFilter) -> Result<f64> {
    let lw = w.log_weights(s, t)?;
    let la: Vec<f64> = lw.iter().zip(s.values()).map(|(l, &e)| l - beta * e).collect();
    Ok(normalized_return(&la, s, t)?.clamp(0.0, 1.0))
}

/// Survival probability of the coherent Gibbs state under no-jump energy
/// dephasing, normalized by `Z(β)·Z_w(β, t)` with
/// `Z_w(β, t) = Σ_n e^{−βE_n − 2κt x_n²}`.
pub fn nojump_sff(s: &Spectrum, beta: f64, t: f64, kappa: f64, f: &DeformationFn) -> Result<f64> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!("kappa must be >= 0, got {kappa}")));
    }
    let x = f.on_spectrum(s)?;
    let e = s.values();
    let la: Vec<f64> = e.iter().zip(&x).map(|(&e, &x)| -beta * e - kappa * t * x * x).collect();
    let lb: Vec<f64> = e.iter().zip(&x).map(|(&e, &x)| -beta * e - 2.0 * kappa * t * x * x).collect();
    let l0: Vec<f64> = e.iter().map(|&e| -beta * e).collect();
    let shift = la.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut re = CompensatedSum::default();
    let mut im = CompensatedSum::default();
    for (&l, &en) in la.iter().zip(e) {
        let amp = math::exp(l - shift);
        let (sn, cs) = libm::sincos(t * en);
        re.add(amp * cs);
        im.add(-amp * sn);
    }
    let num = re.value() * re.value() + im.value() * im.value();
    let log_b = math::log_sum_exp(&lb);
    if log_b == f64::NEG_INFINITY {
        return Err(Error::PartitionUnderflow);
    }
    let log_sff = 2.0 * shift + math::ln(num) - math::log_sum_exp(&l0) - log_b;
    Ok(math::exp(log_sff).clamp(0.0, 1.0))
}

/// Levels of the free-energy operator `F_β = H − (1/β) log w(H)`, re-sorted.
pub fn free_energy_spectrum(s: &Spectrum, beta: f64, w: &EigenvalueFilter, t: f64) -> Result<Spectrum> {
    if beta == 0.0 {
        return Err(Error::ZeroBeta);
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let lw = w.log_weights(s, t)?;
    if let Some(n) = lw.iter().position(|l| *l == f64::NEG_INFINITY) {
        return Err(Error::ZeroEigenWeight { n });
    }
    Spectrum::new(s.values().iter().zip(&lw).map(|(&e, &l)| e - l / beta).collect())
}

/// Long-time plateau of the eigenvalue-filtered SFF and the matching
/// second Rényi entropy of the deformed Gibbs state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformedPlateau {
    pub plateau: f64,
    pub renyi2: f64,
}

pub fn deformed_plateau(s: &Spectrum, beta: f64, w: &EigenvalueFilter, t: f64) -> Result<DeformedPlateau> {
    let f = free_energy_spectrum(s, beta, w, t)?;
    let l1: Vec<f64> = f.values().iter().map(|&x| -beta * x).collect();
    let l2: Vec<f64> = f.values().iter().map(|&x| -2.0 * beta * x).collect();
    let plateau = math::exp(math::log_sum_exp(&l2) - 2.0 * math::log_sum_exp(&l1));
    let rho = gibbs_weights(&f, beta);
    let purity = math::sum(&rho.iter().map(|r| r * r).collect::<Vec<_>>());
    Ok(DeformedPlateau { plateau, renyi2: -math::ln(purity) })
}
