//! Undoing frequency filters.
//!
//! Transform convention: forward `X_k = Σ_j x_j e^{−2πijk/N}`, inverse
//! `x_j = (1/N) Σ_k X_k e^{+2πijk/N}`. Bin `k` of a signal sampled with step
//! `Δt` carries angular frequency `ν_k = 2πk/(NΔt)` for `k ≤ N/2` and
//! `2π(k − N)/(NΔt)` above. Grid deconvolution treats the window as one
//! period, so only the central 80% of a non-periodic window is trustworthy.

use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::ensembles::Spectrum;
use crate::filters::{pair_weighted_sff, pair_weights, FrequencyFilter};
use crate::{Error, Result};

pub const WEIGHT_FLOOR: f64 = 1e-12;
pub const DEFAULT_NOISE_FLOOR: f64 = 1e-6;

/// Unfiltered SFF rebuilt from the filtered double sum by dividing each
/// pair term by its weight. Fails if any `|w(E_n − E_m)|` is below
/// [`WEIGHT_FLOOR`].
pub fn exact_deconvolve(s: &Spectrum, beta: f64, t: f64, w: &FrequencyFilter) -> Result<f64> {
    let weights = pair_weights(s, t, w)?;
    let d = s.dim();
    // Filtered pair weight times its inverse, evaluated rather than assumed to be 1.
    let mut restored = weights.clone();
    for n in 0..d {
        for m in 0..d {
            let wv = weights[n * d + m];
            if !(wv.abs() >= WEIGHT_FLOOR) {
                return Err(Error::ZeroPairWeight { n, m });
            }
            restored[n * d + m] = wv * (1.0 / wv);
        }
    }
    pair_weighted_sff(s, beta, t, &restored)
}

/// In-place radix-2 transform; `inverse` applies the `1/N` factor.
pub fn fft(data: &mut [Complex64], inverse: bool) -> Result<()> {
    let n = data.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) };
        if j > i {
            data.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        for k in 0..half {
            // Twiddles computed directly rather than by recurrence.
            let w = crate::math::cis(sign * core::f64::consts::TAU * k as f64 / len as f64);
            let mut start = 0;
            while start < n {
                let a = data[start + k];
                let b = data[start + k + half] * w;
                data[start + k] = a + b;
                data[start + k + half] = a - b;
                start += len;
            }
        }
        len <<= 1;
    }
    if inverse {
        let scale = 1.0 / n as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }
    Ok(())
}

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !t0.is_finite() {
            return Err(Error::InvalidParameter(format!("bad sampling: t0 = {t0}, dt = {dt}")));
        }
        if values.len() < 2 {
            return Err(Error::InvalidParameter("signal needs at least two samples".into()));
        }
        Ok(Self { t0, dt, values })
    }

    /// Samples `f` at `t0 + jΔt`, `j < n`.
    pub fn sample(t0: f64, dt: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(t0, dt, (0..n).map(|j| f(t0 + j as f64 * dt)).collect())
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|j| self.t0 + j as f64 * self.dt).collect()
    }

    /// Index range of the central `fraction` of the window.
    pub fn central(&self, fraction: f64) -> core::ops::Range<usize> {
        let n = self.values.len();
        let margin = ((1.0 - fraction) * 0.5 * n as f64) as usize;
        margin..n - margin
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        Self { t0: self.t0, dt: self.dt, values }
    }
}

/// Angular frequency of each transform bin.
pub fn bin_frequencies(n: usize, dt: f64) -> Vec<f64> {
    let base = core::f64::consts::TAU / (n as f64 * dt);
    (0..n).map(|k| if k <= n / 2 { k as f64 } else { k as f64 - n as f64 } * base).collect()
}

/// `w(ν_k)` of a frequency filter on the bins of `signal`, at filter time `t`.
pub fn transfer(signal: &SampledSignal, w: &FrequencyFilter, t: f64) -> Result<Vec<f64>> {
    w.validate()?;
    Ok(bin_frequencies(signal.len(), signal.dt).iter().map(|&nu| w.weight_of_difference(nu, t)).collect())
}

fn deconvolve_with(signal: &SampledSignal, w_hat: &[f64], gain: impl Fn(f64) -> f64) -> Result<SampledSignal> {
    let n = signal.len();
    if w_hat.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: w_hat.len() });
    }
    let mut buf: Vec<Complex64> = signal.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft(&mut buf, false)?;
    for (z, &w) in buf.iter_mut().zip(w_hat) {
        *z *= gain(w);
    }
    fft(&mut buf, true)?;
    Ok(signal.with_values(buf.iter().map(|z| z.re).collect()))
}

/// Regularized division `X_k · w_k / (w_k² + ε)` per bin.
pub fn wiener_deconvolve(signal: &SampledSignal, w_hat: &[f64], eps: f64) -> Result<SampledSignal> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise floor must be > 0, got {eps}")));
    }
    deconvolve_with(signal, w_hat, |w| w / (w * w + eps))
}

/// Plain division `X_k / w_k`; bins whose weight is below the smallest
/// normal double are zeroed.
pub fn direct_deconvolve(signal: &SampledSignal, w_hat: &[f64]) -> Result<SampledSignal> {
    deconvolve_with(signal, w_hat, |w| if w.abs() < f64::MIN_POSITIVE { 0.0 } else { 1.0 / w })
}

/// Applies `w_hat` as a multiplier in frequency space (the forward filter).
pub fn convolve(signal: &SampledSignal, w_hat: &[f64]) -> Result<SampledSignal> {
    deconvolve_with(signal, w_hat, |w| w)
}
