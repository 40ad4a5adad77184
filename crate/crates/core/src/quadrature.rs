//! Quadrature rules and discretized continuous-index Kraus families.
//!
//! A frequency filter `w(ν)` with `w(0) = 1` is the characteristic function
//! of a probability density `p(y) = w̃(y)/2π` over time shifts `y`. A
//! [`KrausFamily`] is that density sampled on a quadrature grid: nodes `y_i`
//! with probabilities `p_i` such that `Σ_i p_i e^{−iνy_i} ≈ w(ν)`.

use alloc::format;
use alloc::vec::Vec;

use crate::linalg::tridiagonal_eigen;
use crate::math::{self, CompensatedSum};
use crate::{Error, Result};

pub const DEFAULT_HERMITE_NODES: usize = 41;
pub const DEFAULT_MIDPOINT_NODES: usize = 101;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss–Hermite rule for `∫ e^{−x²} g(x) dx` (Golub–Welsch).
pub fn gauss_hermite(n: usize) -> Result<Rule> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one node".into()));
    }
    let diag = alloc::vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| math::sqrt(k as f64 / 2.0)).collect();
    let eig = tridiagonal_eigen(&diag, &off, true)?;
    let root_pi = math::sqrt(core::f64::consts::PI);
    let mut weights: Vec<f64> = (0..n)
        .map(|j| {
            let v = eig.vector_entry(0, j);
            root_pi * v * v
        })
        .collect();
    // Enforce the exact mirror symmetry of the rule.
    let mut nodes = eig.values;
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(Rule { nodes, weights })
}

/// Midpoint rule on `[a, b]` with `n` cells.
pub fn midpoint(a: f64, b: f64, n: usize) -> Result<Rule> {
    if n == 0 || !(b > a) {
        return Err(Error::InvalidParameter(format!("bad midpoint rule: [{a}, {b}], n = {n}")));
    }
    let h = (b - a) / n as f64;
    Ok(Rule {
        nodes: (0..n).map(|i| a + (i as f64 + 0.5) * h).collect(),
        weights: alloc::vec![h; n],
    })
}

/// Time-shift probabilities on a quadrature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausFamily {
    shifts: Vec<f64>,
    probabilities: Vec<f64>,
}

impl KrausFamily {
    /// Raw family; no normalization is imposed so that
    /// [`kraus_normalization_check`] can flag broken ones.
    pub fn from_parts(shifts: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        if shifts.is_empty() || shifts.len() != probabilities.len() {
            return Err(Error::InvalidParameter("Kraus family needs matching, non-empty columns".into()));
        }
        if probabilities.iter().any(|p| !(*p >= 0.0 && p.is_finite())) || shifts.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidParameter("Kraus probabilities must be finite and >= 0".into()));
        }
        Ok(Self { shifts, probabilities })
    }

    /// Family for the Gaussian filter `w(ν) = e^{−aν²}`: the shift density is
    /// `e^{−y²/4a}/√(4πa)`, sampled with `y = 2√a·x` on Gauss–Hermite nodes.
    pub fn gaussian(a: f64, nodes: usize) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("Gaussian width must be >= 0, got {a}")));
        }
        let rule = gauss_hermite(nodes)?;
        let root_pi = math::sqrt(core::f64::consts::PI);
        let scale = 2.0 * math::sqrt(a);
        Self::from_parts(
            rule.nodes.iter().map(|x| scale * x).collect(),
            rule.weights.iter().map(|w| w / root_pi).collect(),
        )
    }

    /// Family for the box window of length `T`, `w(ν) = sinc(νT/2)`: uniform
    /// shifts on `[−T/2, T/2]`, midpoint rule.
    pub fn box_window(duration: f64, nodes: usize) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidParameter(format!("window length must be > 0, got {duration}")));
        }
        let rule = midpoint(-0.5 * duration, 0.5 * duration, nodes)?;
        let n = rule.nodes.len();
        Self::from_parts(rule.nodes, alloc::vec![1.0 / n as f64; n])
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    /// `Σ_i p_i cos(ν y_i)`: the filter reproduced by the family.
    pub fn characteristic(&self, nu: f64) -> f64 {
        let mut acc = CompensatedSum::default();
        for (y, p) in self.shifts.iter().zip(&self.probabilities) {
            acc.add(p * math::cos(nu * y));
        }
        acc.value()
    }
}

/// Quadrature estimate of `∫ dy w̃(y)/2π`; 1 for a trace-preserving family.
pub fn kraus_normalization_check(family: &KrausFamily) -> f64 {
    math::sum(&family.probabilities)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_rule_integrates_moments() {
        let r = gauss_hermite(41).unwrap();
        let root_pi = math::sqrt(core::f64::consts::PI);
        let m0: f64 = r.weights.iter().sum();
        let m2: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x * x).sum();
        let m4: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m0 - root_pi).abs() < 1e-13);
        assert!((m2 - root_pi / 2.0).abs() < 1e-13);
        assert!((m4 - 3.0 * root_pi / 4.0).abs() < 1e-12);
        let g = gauss_hermite(2).unwrap();
        assert!((g.nodes[1] - math::sqrt(0.5)).abs() < 1e-15);
    }

    #[test]
    fn gaussian_family_reproduces_filter() {
        let fam = KrausFamily::gaussian(0.25, 41).unwrap();
        assert!((kraus_normalization_check(&fam) - 1.0).abs() < 1e-6);
        for &nu in &[0.0, 0.5, 2.0, 4.0] {
            let exact = math::exp(-0.25 * nu * nu);
            assert!((fam.characteristic(nu) - exact).abs() < 1e-6, "nu = {nu}");
        }
    }

    #[test]
    fn box_family_is_normalized() {
        let fam = KrausFamily::box_window(3.0, 101).unwrap();
        assert_eq!(kraus_normalization_check(&fam), 1.0);
        let doubled = KrausFamily::from_parts(fam.shifts().to_vec(), fam.probabilities().iter().map(|p| 2.0 * p).collect()).unwrap();
        assert!((kraus_normalization_check(&doubled) - 2.0).abs() < 1e-15);
    }
}
