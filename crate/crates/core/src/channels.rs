//! Small density-matrix laboratory.
//!
//! Every state lives in the energy eigenbasis of a fixed Hamiltonian
//! `H = diag(E)` unless a channel member carries its own Hamiltonian, in
//! which case that Hamiltonian is written in the same basis as the state.
//! Deformed Lindblad operators are `X = f(H) = diag(x)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand_chacha::rand_core::Rng;

use crate::ensembles::{self, GoeConfig, Spectrum, SymmetricMatrix};
use crate::linalg::{self, adjoint, cmatmul};
use crate::math::{self, CompensatedSum};
use crate::quadrature::KrausFamily;
use crate::rng::uniform;
use crate::spectral::gibbs_weights;
use crate::{Error, Result};

pub const MAX_CHANNEL_DIM: usize = 64;
const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const POSITIVITY_FLOOR: f64 = -1e-10;
const PROBABILITY_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Density matrix, row-major complex `d×d`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        let rho = Self::from_raw(dim, entries)?;
        rho.check()?;
        Ok(rho)
    }

    pub(crate) fn new_unchecked(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        Self::from_raw(dim, entries)
    }

    fn from_raw(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        check_dim(dim)?;
        Ok(Self { dim, entries })
    }

    /// `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidParameter(format!("state norm is {norm}, expected 1")));
        }
        let d = psi.len();
        let mut e = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                e[i * d + j] = psi[i] * psi[j].conj();
            }
        }
        Self::from_raw(d, e)
    }

    /// `I/d`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        let mut e = vec![ZERO; dim * dim];
        for i in 0..dim {
            e[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self::from_raw(dim, e)
    }

    /// Re-checks the density-matrix invariants.
    pub fn check(&self) -> Result<()> {
        let d = self.dim;
        for i in 0..d {
            for j in 0..=i {
                if (self.get(i, j) - self.get(j, i).conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::InvalidParameter(format!("not Hermitian at ({i},{j})")));
                }
            }
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidParameter(format!("trace is {tr}, expected 1")));
        }
        let min = self.min_eigenvalue()?;
        if min < POSITIVITY_FLOOR {
            return Err(Error::InvalidParameter(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::hermitian_eigenvalues(&self.entries, self.dim)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim;
        let mut m: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                m = m.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        m
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d > MAX_CHANNEL_DIM {
        return Err(Error::DimensionTooLarge { dim: d, max: MAX_CHANNEL_DIM });
    }
    Ok(())
}

fn check_basis(rho: &DensityMatrix, s: &Spectrum, x: Option<&[f64]>) -> Result<()> {
    if s.dim() != rho.dim {
        return Err(Error::DimensionMismatch { expected: rho.dim, found: s.dim() });
    }
    if let Some(x) = x {
        if x.len() != rho.dim {
            return Err(Error::DimensionMismatch { expected: rho.dim, found: x.len() });
        }
    }
    Ok(())
}

/// Amplitudes `e^{−βE_n/2}/√Z(β)` of the coherent Gibbs state.
pub fn coherent_gibbs_state(s: &Spectrum, beta: f64) -> Vec<Complex64> {
    gibbs_weights(s, beta).iter().map(|p| Complex64::new(math::sqrt(*p), 0.0)).collect()
}

/// `|ψ_β⟩⟨ψ_β|` in the energy eigenbasis.
pub fn coherent_gibbs_dm(s: &Spectrum, beta: f64) -> Result<DensityMatrix> {
    if s.dim() > crate::spectral::MAX_STATE_DIM {
        return Err(Error::DimensionTooLarge { dim: s.dim(), max: crate::spectral::MAX_STATE_DIM });
    }
    let p = gibbs_weights(s, beta);
    let d = s.dim();
    let mut e = vec![ZERO; d * d];
    for i in 0..d {
        for j in 0..d {
            e[i * d + j] = Complex64::new(math::sqrt(p[i] * p[j]), 0.0);
        }
    }
    Ok(DensityMatrix { dim: d, entries: e })
}

/// `ρ_nm(t) = ρ_nm(0) e^{−it(E_n−E_m) − κt(x_n−x_m)²}`.
pub fn dephasing_closed_form(rho0: &DensityMatrix, s: &Spectrum, x: &[f64], kappa: f64, t: f64) -> Result<DensityMatrix> {
    check_basis(rho0, s, Some(x))?;
    let d = rho0.dim;
    let e = s.values();
    let mut out = rho0.entries.clone();
    for n in 0..d {
        for m in 0..d {
            let dx = x[n] - x[m];
            let phase = math::cis(-t * (e[n] - e[m]));
            out[n * d + m] *= phase * math::exp(-kappa * t * dx * dx);
        }
    }
    DensityMatrix::from_raw(d, out)
}

/// Largest step allowed by the propagators: `10⁻³/(κ·spread(x)² + spread(E))`.
pub fn step_limit(s: &Spectrum, x: &[f64], kappa: f64) -> f64 {
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let sx = if x.is_empty() { 0.0 } else { hi - lo };
    let rate = kappa * sx * sx + s.spread();
    if rate == 0.0 {
        f64::INFINITY
    } else {
        1e-3 / rate
    }
}

/// Smallest step count satisfying [`step_limit`] over `[0, t]`.
pub fn min_steps(s: &Spectrum, x: &[f64], kappa: f64, t: f64) -> usize {
    let lim = step_limit(s, x, kappa);
    if !lim.is_finite() {
        return 1;
    }
    let mut n = (libm::ceil(t.abs() / lim) as usize).max(1);
    while t.abs() / n as f64 > lim {
        n += 1;
    }
    n
}

fn check_steps(s: &Spectrum, x: &[f64], kappa: f64, t: f64, steps: usize) -> Result<f64> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be >= 1".into()));
    }
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!("kappa must be >= 0, got {kappa}")));
    }
    let h = t / steps as f64;
    let limit = step_limit(s, x, kappa);
    if h.abs() > limit {
        return Err(Error::StepTooLarge { step: h.abs(), limit });
    }
    Ok(h)
}

fn diag_matrix(v: &[f64]) -> Vec<Complex64> {
    let d = v.len();
    let mut m = vec![ZERO; d * d];
    for (i, &x) in v.iter().enumerate() {
        m[i * d + i] = Complex64::new(x, 0.0);
    }
    m
}

fn axpy(y: &[Complex64], a: f64, k: &[Complex64]) -> Vec<Complex64> {
    y.iter().zip(k).map(|(y, k)| y + k * a).collect()
}

/// Classical RK4 for an autonomous matrix ODE.
fn rk4(y0: &[Complex64], h: f64, steps: usize, f: impl Fn(&[Complex64]) -> Vec<Complex64>) -> Vec<Complex64> {
    let mut y = y0.to_vec();
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&axpy(&y, 0.5 * h, &k1));
        let k3 = f(&axpy(&y, 0.5 * h, &k2));
        let k4 = f(&axpy(&y, h, &k3));
        for i in 0..y.len() {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    y
}

/// Integrates `dρ/dt = −i[H,ρ] − κ[X,[X,ρ]]` with fixed-step RK4.
pub fn dephasing_propagate(rho0: &DensityMatrix, s: &Spectrum, x: &[f64], kappa: f64, t: f64, steps: usize) -> Result<DensityMatrix> {
    check_basis(rho0, s, Some(x))?;
    let h = check_steps(s, x, kappa, t, steps)?;
    let d = rho0.dim;
    let hm = diag_matrix(s.values());
    let xm = diag_matrix(x);
    let minus_i = Complex64::new(0.0, -1.0);
    let out = rk4(&rho0.entries, h, steps, |rho| {
        let c = linalg::commutator(&hm, rho, d);
        let xx = linalg::commutator(&xm, &linalg::commutator(&xm, rho, d), d);
        c.iter().zip(&xx).map(|(c, xx)| c * minus_i - xx * kappa).collect()
    });
    DensityMatrix::from_raw(d, out)
}

/// Integrates the norm-restored no-jump equation
/// `dρ/dt = −i(H_T ρ − ρ H_T†) + 2 tr(Γρ) ρ`, `H_T = H − iΓ`, `Γ = κX²`.
pub fn nojump_propagate(rho0: &DensityMatrix, s: &Spectrum, x: &[f64], kappa: f64, t: f64, steps: usize) -> Result<DensityMatrix> {
    check_basis(rho0, s, Some(x))?;
    let h = check_steps(s, x, kappa, t, steps)?;
    let d = rho0.dim;
    let hm = diag_matrix(s.values());
    let gamma = diag_matrix(&x.iter().map(|v| kappa * v * v).collect::<Vec<_>>());
    let minus_i = Complex64::new(0.0, -1.0);
    let out = rk4(&rho0.entries, h, steps, |rho| {
        let c = linalg::commutator(&hm, rho, d);
        let gr = cmatmul(&gamma, rho, d);
        let rg = cmatmul(rho, &gamma, d);
        let tr: Complex64 = (0..d).map(|i| gr[i * d + i]).sum();
        (0..d * d).map(|k| c[k] * minus_i - gr[k] - rg[k] + rho[k] * (tr * 2.0)).collect()
    });
    DensityMatrix::from_raw(d, out)
}

/// Generator of one unitary in a mixed-unitary channel.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitaryGenerator {
    /// `U = e^{−iH(t + y)}` under the ensemble's base Hamiltonian.
    TimeShift(f64),
    /// `U = e^{−iH_y t}` for a member Hamiltonian.
    Hamiltonian(SymmetricMatrix),
}

/// Convex combination of unitary conjugations.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedUnitaryEnsemble {
    base: Option<Spectrum>,
    members: Vec<(f64, UnitaryGenerator)>,
}

impl MixedUnitaryEnsemble {
    /// `base` is required when any member is a time shift.
    pub fn new(base: Option<Spectrum>, members: Vec<(f64, UnitaryGenerator)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidParameter("ensemble needs at least one member".into()));
        }
        if members.iter().any(|(p, _)| !(*p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidParameter("member probabilities must be >= 0".into()));
        }
        let total = math::sum(&members.iter().map(|(p, _)| *p).collect::<Vec<_>>());
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}, expected 1")));
        }
        let mut dim = base.as_ref().map(Spectrum::dim);
        for (_, g) in &members {
            match g {
                UnitaryGenerator::TimeShift(y) => {
                    if base.is_none() {
                        return Err(Error::InvalidParameter("time-shift member without a base Hamiltonian".into()));
                    }
                    if !y.is_finite() {
                        return Err(Error::InvalidParameter("time shift must be finite".into()));
                    }
                }
                UnitaryGenerator::Hamiltonian(h) => match dim {
                    Some(d) if d != h.dim() => return Err(Error::DimensionMismatch { expected: d, found: h.dim() }),
                    _ => dim = Some(h.dim()),
                },
            }
        }
        check_dim(dim.unwrap_or(0))?;
        Ok(Self { base, members })
    }

    /// Time-shift ensemble discretizing a continuous Kraus family.
    pub fn time_shifts(base: Spectrum, family: &KrausFamily) -> Result<Self> {
        let total = math::sum(family.probabilities());
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::InvalidParameter(format!("Kraus family sums to {total}, expected 1")));
        }
        let members = family
            .shifts()
            .iter()
            .zip(family.probabilities())
            .map(|(&y, &p)| (p, UnitaryGenerator::TimeShift(y)))
            .collect();
        Self::new(Some(base), members)
    }

    pub fn members(&self) -> &[(f64, UnitaryGenerator)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn unitary(&self, k: usize, t: f64) -> Result<Vec<Complex64>> {
        match &self.members[k].1 {
            UnitaryGenerator::TimeShift(y) => {
                let e = self.base.as_ref().expect("validated").values();
                let d = e.len();
                let mut u = vec![ZERO; d * d];
                for n in 0..d {
                    u[n * d + n] = math::cis(-e[n] * (t + y));
                }
                Ok(u)
            }
            UnitaryGenerator::Hamiltonian(h) => {
                let eig = ensembles::eigen_decompose(h)?;
                let d = h.dim();
                let phases: Vec<Complex64> = eig.values.iter().map(|&e| math::cis(-e * t)).collect();
                let mut u = vec![ZERO; d * d];
                for i in 0..d {
                    for j in 0..d {
                        u[i * d + j] = (0..d).map(|k| phases[k] * eig.vector_entry(i, k) * eig.vector_entry(j, k)).sum();
                    }
                }
                Ok(u)
            }
        }
    }
}

fn conjugate(u: &[Complex64], rho: &[Complex64], d: usize) -> Vec<Complex64> {
    cmatmul(&cmatmul(u, rho, d), &adjoint(u, d), d)
}

/// `Σ_y p_y U_y(t) ρ0 U_y(t)†`.
///
/// Pure time-shift ensembles act entrywise, `ρ_nm · Σ_y p_y e^{−i(E_n−E_m)(t+y)}`,
/// normalized by `Σ_y p_y` so populations are reproduced exactly.
pub fn mixed_unitary_apply(rho0: &DensityMatrix, ens: &MixedUnitaryEnsemble, t: f64) -> Result<DensityMatrix> {
    let d = rho0.dim;
    let shifts_only = ens.members.iter().all(|(_, g)| matches!(g, UnitaryGenerator::TimeShift(_)));
    if shifts_only {
        let s = ens.base.as_ref().expect("validated");
        check_basis(rho0, s, None)?;
        let e = s.values();
        let total = math::sum(&ens.members.iter().map(|(p, _)| *p).collect::<Vec<_>>());
        let mut out = rho0.entries.clone();
        for n in 0..d {
            for m in 0..d {
                if n == m {
                    continue;
                }
                let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
                for (p, g) in &ens.members {
                    let UnitaryGenerator::TimeShift(y) = g else { unreachable!() };
                    let z = math::cis(-(e[n] - e[m]) * (t + y));
                    re.add(p * z.re);
                    im.add(p * z.im);
                }
                out[n * d + m] *= Complex64::new(re.value(), im.value()) / total;
            }
        }
        return DensityMatrix::from_raw(d, out);
    }
    if let Some(s) = &ens.base {
        check_basis(rho0, s, None)?;
    }
    let mut acc = vec![ZERO; d * d];
    for (k, (p, g)) in ens.members.iter().enumerate() {
        if let UnitaryGenerator::Hamiltonian(h) = g {
            if h.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: h.dim() });
            }
        }
        let u = ens.unitary(k, t)?;
        for (a, v) in acc.iter_mut().zip(conjugate(&u, &rho0.entries, d)) {
            *a += v * *p;
        }
    }
    DensityMatrix::from_raw(d, acc)
}

/// Mean over realizations of `|⟨ψ_β(H)|e^{−iHt}|ψ_β(H)⟩|²`, with the coherent
/// Gibbs state built from each realization's eigenvectors in the
/// computational basis.
pub fn ensemble_channel_survival(config: &GoeConfig, beta: f64, t: f64) -> Result<f64> {
    let d = config.dim();
    let mut acc = CompensatedSum::default();
    for idx in 0..config.count() {
        let h = ensembles::sample_goe(config, idx)?;
        let eig = ensembles::eigen_decompose(&h).map_err(|e| match e {
            Error::EigenNoConvergence { .. } => Error::EigenNoConvergence { index: Some(idx) },
            other => other,
        })?;
        let s = Spectrum::new(eig.values.clone())?;
        let amp = gibbs_weights(&s, beta);
        let mut psi = vec![0.0; d];
        let mut evolved = vec![ZERO; d];
        for k in 0..d {
            let a = math::sqrt(amp[k]);
            let phase = math::cis(-eig.values[k] * t);
            for i in 0..d {
                let v = eig.vector_entry(i, k);
                psi[i] += a * v;
                evolved[i] += phase * (a * v);
            }
        }
        let overlap: Complex64 = psi.iter().zip(&evolved).map(|(p, e)| e * *p).sum();
        acc.add(overlap.norm_sqr());
    }
    Ok(acc.value() / config.count() as f64)
}

/// `Σ_nm |ρ_nm|²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    math::sum(&rho.entries.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>())
}

pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - purity(rho)
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_pure(psi: &[Complex64], rho: &DensityMatrix) -> Result<f64> {
    let d = rho.dim;
    if psi.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: psi.len() });
    }
    let mut acc = ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += psi[i].conj() * rho.get(i, j) * psi[j];
        }
    }
    Ok(acc.re)
}

/// `½ Σ |λ_i(ρ − σ)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, found: b.dim });
    }
    let diff: Vec<Complex64> = a.entries.iter().zip(&b.entries).map(|(x, y)| x - y).collect();
    Ok(0.5 * linalg::hermitian_eigenvalues(&diff, a.dim)?.iter().map(|l| l.abs()).sum::<f64>())
}

/// One outcome of the environment measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentRecord {
    pub outcome: usize,
    pub post_state: DensityMatrix,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub record: InstrumentRecord,
    pub recovered: DensityMatrix,
}

/// Samples an outcome `y ~ p`, applies `U_y`, then undoes it with `U_y†`.
pub fn instrument_recover<R: Rng + ?Sized>(rho0: &DensityMatrix, ens: &MixedUnitaryEnsemble, t: f64, rng: &mut R) -> Result<Recovery> {
    let d = rho0.dim;
    if let Some(s) = &ens.base {
        check_basis(rho0, s, None)?;
    }
    let u = uniform(rng);
    let mut cum = 0.0;
    let mut outcome = ens.members.len() - 1;
    for (k, (p, _)) in ens.members.iter().enumerate() {
        cum += p;
        if u < cum {
            outcome = k;
            break;
        }
    }
    let uy = ens.unitary(outcome, t)?;
    let post = conjugate(&uy, &rho0.entries, d);
    let recovered = conjugate(&adjoint(&uy, d), &post, d);
    Ok(Recovery {
        record: InstrumentRecord {
            outcome,
            post_state: DensityMatrix::from_raw(d, post)?,
            probability: ens.members[outcome].0,
        },
        recovered: DensityMatrix::from_raw(d, recovered)?,
    })
}
