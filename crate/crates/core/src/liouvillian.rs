//! Vectorized superoperators on `d×d` density matrices.
//!
//! Row-major vectorization: `vec(ρ)[n·d + m] = ρ_nm`, so that
//! `vec(AXB) = (A ⊗ Bᵀ) vec(X)`. The closed-system Liouvillian is
//! `𝕃 = −i(H ⊗ I − I ⊗ Hᵀ)`. In the energy eigenbasis both `𝕃` and any
//! deformation `W(𝕃)` are diagonal on the `|n⟩⟨m|` basis, which is cached
//! and used for exponentials.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::channels::DensityMatrix;
use crate::ensembles::Spectrum;
use crate::filters::FrequencyFilter;
use crate::linalg;
use crate::math;
use crate::{Error, Result};

pub const MAX_LIOUVILLE_DIM: usize = 16;
pub const MAX_TAYLOR_DIM: usize = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense `d²×d²` superoperator with its diagonal spectral cache.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: Vec<Complex64>,
    /// Eigenvalue on `|n⟩⟨m|`; right and left eigenvectors are the unit
    /// vectors of the `|n⟩⟨m|` basis.
    diagonal: Vec<Complex64>,
    energies: Vec<f64>,
}

impl Superoperator {
    fn from_diagonal(energies: &[f64], diagonal: Vec<Complex64>) -> Self {
        let d = energies.len();
        let big = d * d;
        let mut matrix = vec![ZERO; big * big];
        for (k, z) in diagonal.iter().enumerate() {
            matrix[k * big + k] = *z;
        }
        Self { dim: d, matrix, diagonal, energies: energies.to_vec() }
    }

    /// Hilbert-space dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major `d²×d²` matrix.
    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    /// Cached eigenvalues, indexed by `n·d + m`.
    pub fn cached_eigenvalues(&self) -> &[Complex64] {
        &self.diagonal
    }

    /// Dense matrix–vector product.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let big = self.dim * self.dim;
        if v.len() != big {
            return Err(Error::DimensionMismatch { expected: big, found: v.len() });
        }
        Ok((0..big).map(|i| self.matrix[i * big..(i + 1) * big].iter().zip(v).map(|(a, b)| a * b).sum()).collect())
    }

    /// Largest entry of `A + A†`.
    pub fn anti_hermiticity_defect(&self) -> f64 {
        self.symmetry_defect(1.0)
    }

    /// Largest entry of `A − A†`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.symmetry_defect(-1.0)
    }

    fn symmetry_defect(&self, sign: f64) -> f64 {
        let big = self.dim * self.dim;
        let mut m: f64 = 0.0;
        for i in 0..big {
            for j in 0..big {
                m = m.max((self.matrix[i * big + j] + self.matrix[j * big + i].conj() * sign).norm());
            }
        }
        m
    }

    /// Eigenvalues of an anti-Hermitian superoperator, computed independently
    /// of the cache from the Hermitian matrix `i·A`. Ascending in `Im`.
    pub fn anti_hermitian_eigenvalues(&self) -> Result<Vec<Complex64>> {
        let i = Complex64::new(0.0, 1.0);
        let h: Vec<Complex64> = self.matrix.iter().map(|z| z * i).collect();
        let vals = linalg::hermitian_eigenvalues(&h, self.dim * self.dim)?;
        Ok(vals.iter().map(|&l| Complex64::new(0.0, -l)).collect())
    }
}

fn vectorize(rho: &DensityMatrix) -> Vec<Complex64> {
    rho.as_slice().to_vec()
}

fn unvectorize(d: usize, v: Vec<Complex64>) -> Result<DensityMatrix> {
    let rho = DensityMatrix::new_unchecked(d, v)?;
    Ok(rho)
}

/// `𝕃 = −i(H ⊗ I − I ⊗ Hᵀ)` for `H = diag(E)`.
pub fn build_liouvillian(s: &Spectrum) -> Result<Superoperator> {
    let d = s.dim();
    if d > MAX_LIOUVILLE_DIM {
        return Err(Error::DimensionTooLarge { dim: d, max: MAX_LIOUVILLE_DIM });
    }
    let e = s.values();
    let big = d * d;
    let mut hm = vec![0.0; d * d];
    for n in 0..d {
        hm[n * d + n] = e[n];
    }
    // Explicit Kronecker products.
    let mut matrix = vec![ZERO; big * big];
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for f in 0..d {
                    let left = hm[a * d + c] * if b == f { 1.0 } else { 0.0 };
                    let right = if a == c { 1.0 } else { 0.0 } * hm[f * d + b];
                    matrix[(a * d + b) * big + (c * d + f)] = Complex64::new(0.0, -(left - right));
                }
            }
        }
    }
    let mut diagonal = vec![ZERO; big];
    for n in 0..d {
        for m in 0..d {
            diagonal[n * d + m] = Complex64::new(0.0, -(e[n] - e[m]));
        }
    }
    Ok(Superoperator { dim: d, matrix, diagonal, energies: e.to_vec() })
}

/// `W(𝕃) = log w(i𝕃)`: eigenvalue `log w(E_n − E_m)` on `|n⟩⟨m|`, with the
/// filter evaluated at time `t0`.
pub fn deform(l: &Superoperator, w: &FrequencyFilter, t0: f64) -> Result<Superoperator> {
    w.validate()?;
    let d = l.dim;
    let e = &l.energies;
    let mut diagonal = vec![ZERO; d * d];
    for n in 0..d {
        for m in 0..d {
            let wv = w.weight_of_difference(e[n] - e[m], t0);
            if !(wv > 0.0) {
                return Err(Error::ZeroPairWeight { n, m });
            }
            diagonal[n * d + m] = Complex64::new(math::ln(wv), 0.0);
        }
    }
    Ok(Superoperator::from_diagonal(e, diagonal))
}

/// The zero deformation.
pub fn zero_deformation(l: &Superoperator) -> Superoperator {
    Superoperator::from_diagonal(&l.energies, vec![ZERO; l.dim * l.dim])
}

fn check_pair(rho: &DensityMatrix, l: &Superoperator, w: &Superoperator) -> Result<()> {
    if rho.dim() != l.dim {
        return Err(Error::DimensionMismatch { expected: l.dim, found: rho.dim() });
    }
    if w.dim != l.dim {
        return Err(Error::DimensionMismatch { expected: l.dim, found: w.dim });
    }
    Ok(())
}

/// `ρ_t = e^{𝕃t} e^{W} ρ0`.
pub fn kick_evolve(rho0: &DensityMatrix, l: &Superoperator, w: &Superoperator, t: f64) -> Result<DensityMatrix> {
    check_pair(rho0, l, w)?;
    let mut v = vectorize(rho0);
    for (k, z) in v.iter_mut().enumerate() {
        let lk = l.diagonal[k] * t;
        *z *= math::cis(lk.im) * math::exp(lk.re) * math::exp(w.diagonal[k].re);
    }
    unvectorize(l.dim, v)
}

/// Time profile `χ(t)` of the deformation strength.
#[derive(Debug, Clone, PartialEq)]
pub enum ChiSchedule {
    /// `χ = Θ(t)`: a single kick, handled by [`kick_evolve`].
    Heaviside,
    /// `χ(t) = t`.
    Linear,
    /// Piecewise-linear `χ` through samples, starting at `(0, 0)`.
    Custom { times: Vec<f64>, values: Vec<f64> },
}

impl ChiSchedule {
    pub fn custom(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::InvalidParameter("chi schedule needs at least two samples".into()));
        }
        if times[0] != 0.0 || values[0] != 0.0 {
            return Err(Error::InvalidParameter("chi schedule must start at chi(0) = 0".into()));
        }
        if times.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidParameter("chi sample times must increase".into()));
        }
        Ok(ChiSchedule::Custom { times, values })
    }

    /// `χ̇(t)`; piecewise constant for sampled schedules, clamped past the ends.
    pub fn rate(&self, t: f64) -> Result<f64> {
        match self {
            ChiSchedule::Heaviside => Err(Error::KickSchedule),
            ChiSchedule::Linear => Ok(1.0),
            ChiSchedule::Custom { times, values } => {
                let last = times.len() - 2;
                let i = times.partition_point(|&x| x <= t).saturating_sub(1).min(last);
                Ok((values[i + 1] - values[i]) / (times[i + 1] - times[i]))
            }
        }
    }
}

/// RK4 integration of `d|ρ)/dt = [𝕃 + χ̇(t) W] |ρ)` using the dense matrices.
pub fn continuous_evolve(
    rho0: &DensityMatrix,
    l: &Superoperator,
    w: &Superoperator,
    chi: &ChiSchedule,
    t: f64,
    steps: usize,
) -> Result<DensityMatrix> {
    check_pair(rho0, l, w)?;
    if matches!(chi, ChiSchedule::Heaviside) {
        return Err(Error::KickSchedule);
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be >= 1".into()));
    }
    let h = t / steps as f64;
    let rhs = |r: f64, v: &[Complex64]| -> Result<Vec<Complex64>> {
        let a = l.apply(v)?;
        let b = w.apply(v)?;
        Ok(a.iter().zip(&b).map(|(a, b)| a + b * r).collect())
    };
    let mut v = vectorize(rho0);
    for k in 0..steps {
        // χ̇ is piecewise constant; sampling it once per step at the midpoint
        // keeps steps whose edges sit on breakpoints exact.
        let r = chi.rate((k as f64 + 0.5) * h)?;
        let k1 = rhs(r, &v)?;
        let y2: Vec<Complex64> = v.iter().zip(&k1).map(|(y, k)| y + k * (0.5 * h)).collect();
        let k2 = rhs(r, &y2)?;
        let y3: Vec<Complex64> = v.iter().zip(&k2).map(|(y, k)| y + k * (0.5 * h)).collect();
        let k3 = rhs(r, &y3)?;
        let y4: Vec<Complex64> = v.iter().zip(&k3).map(|(y, k)| y + k * h).collect();
        let k4 = rhs(r, &y4)?;
        for i in 0..v.len() {
            v[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    unvectorize(l.dim, v)
}

/// Max-norm gap between the truncated nested-commutator series
/// `Σ_{k=1}^{N} c_k ad_H^{2k} ρ` and the exact action `log w(E_n−E_m) ρ_nm`,
/// where `log w(x) = Σ c_k x^{2k}`. Built-in analytic filters only.
pub fn taylor_dissipator_check(rho: &DensityMatrix, s: &Spectrum, w: &FrequencyFilter, orders: usize, t: f64) -> Result<f64> {
    let d = s.dim();
    if d > MAX_TAYLOR_DIM {
        return Err(Error::DimensionTooLarge { dim: d, max: MAX_TAYLOR_DIM });
    }
    if rho.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho.dim() });
    }
    w.validate()?;
    let coeffs = w.log_series(orders, t).ok_or(Error::Unsupported("Taylor series needs a built-in analytic filter"))?;
    let e = s.values();
    let mut h = vec![ZERO; d * d];
    for n in 0..d {
        h[n * d + n] = Complex64::new(e[n], 0.0);
    }
    let mut series = vec![ZERO; d * d];
    let mut ad = rho.as_slice().to_vec();
    for c in &coeffs {
        ad = linalg::commutator(&h, &linalg::commutator(&h, &ad, d), d);
        for (acc, a) in series.iter_mut().zip(&ad) {
            *acc += a * *c;
        }
    }
    let mut residual: f64 = 0.0;
    for n in 0..d {
        for m in 0..d {
            let wv = w.weight_of_difference(e[n] - e[m], t);
            if !(wv > 0.0) {
                return Err(Error::ZeroPairWeight { n, m });
            }
            let exact = rho.get(n, m) * math::ln(wv);
            residual = residual.max((series[n * d + m] - exact).norm());
        }
    }
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::DeformationFn;

    #[test]
    fn two_level_eigenvalues() {
        let l = build_liouvillian(&Spectrum::new(vec![0.0, 0.7]).unwrap()).unwrap();
        let mut ims: Vec<f64> = l.anti_hermitian_eigenvalues().unwrap().iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        let expect = [-0.7, 0.0, 0.0, 0.7];
        for (a, b) in ims.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(l.anti_hermiticity_defect() < 1e-15);
    }

    #[test]
    fn zero_hamiltonian() {
        let l = build_liouvillian(&Spectrum::new(vec![0.0; 3]).unwrap()).unwrap();
        assert!(l.matrix().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn gaussian_deformation_diagonal() {
        let s = Spectrum::new(vec![-0.3, 0.4, 1.0]).unwrap();
        let l = build_liouvillian(&s).unwrap();
        let w = deform(&l, &FrequencyFilter::GaussianDephasing { kappa: 0.2, f: DeformationFn::Identity }, 1.5).unwrap();
        let e = s.values();
        for n in 0..3 {
            for m in 0..3 {
                let v = w.cached_eigenvalues()[n * 3 + m].re;
                assert!((v + 0.3 * (e[n] - e[m]).powi(2)).abs() < 1e-15);
            }
        }
        assert!(w.hermiticity_defect() < 1e-15);
        let window = FrequencyFilter::TimeWindow { duration: core::f64::consts::PI / 0.35 * 2.0 };
        assert!(matches!(deform(&l, &window, 0.0), Err(Error::ZeroPairWeight { .. })));
    }

    #[test]
    fn heaviside_is_rejected() {
        let s = Spectrum::new(vec![0.0, 1.0]).unwrap();
        let l = build_liouvillian(&s).unwrap();
        let w = zero_deformation(&l);
        let rho = crate::channels::coherent_gibbs_dm(&s, 0.0).unwrap();
        assert_eq!(continuous_evolve(&rho, &l, &w, &ChiSchedule::Heaviside, 1.0, 10), Err(Error::KickSchedule));
    }
}
