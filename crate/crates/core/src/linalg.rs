//! Dense symmetric and Hermitian eigensolvers plus small complex-matrix
//! kernels.
//!
//! The real symmetric solver is Householder tridiagonalization followed by
//! the implicit QL iteration with Wilkinson-style shifts (the EISPACK
//! `tred2`/`tql2` pair). Matrices are row-major `n*n` slices throughout.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::{Error, Result};

const MAX_QL_ITERATIONS: usize = 60;

/// Eigen-decomposition of a real symmetric matrix.
///
/// `values` are ascending. `vectors` (when requested) is row-major with
/// eigenvector `j` stored in column `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<f64>>,
}

impl SymmetricEigen {
    /// Component `i` of eigenvector `j`.
    pub fn vector_entry(&self, i: usize, j: usize) -> f64 {
        let n = self.values.len();
        self.vectors.as_ref().expect("eigenvectors were not requested")[i * n + j]
    }
}

/// Diagonalize the symmetric matrix `a` (row-major, `n*n`).
///
/// Only the lower triangle is read.
pub fn symmetric_eigen(a: &[f64], n: usize, want_vectors: bool) -> Result<SymmetricEigen> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, found: a.len() });
    }
    if n == 0 {
        return Ok(SymmetricEigen { values: Vec::new(), vectors: want_vectors.then(Vec::new) });
    }
    let mut v = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e, n);
    tql2(&mut v, &mut d, &mut e, n, want_vectors)?;
    Ok(sorted(d, want_vectors.then_some(v), n))
}

/// Diagonalize a symmetric tridiagonal matrix given its diagonal and its
/// sub-diagonal (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64], want_vectors: bool) -> Result<SymmetricEigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(SymmetricEigen { values: Vec::new(), vectors: want_vectors.then(Vec::new) });
    }
    if off.len() + 1 != n {
        return Err(Error::DimensionMismatch { expected: n - 1, found: off.len() });
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let mut d = diag.to_vec();
    // tql2 expects e[i] to hold the coupling between i-1 and i.
    let mut e = vec![0.0; n];
    e[1..].copy_from_slice(off);
    tql2(&mut v, &mut d, &mut e, n, want_vectors)?;
    Ok(sorted(d, want_vectors.then_some(v), n))
}

fn sorted(d: Vec<f64>, v: Option<Vec<f64>>, n: usize) -> SymmetricEigen {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = v.map(|v| {
        let mut out = vec![0.0; n * n];
        for (col, &src) in order.iter().enumerate() {
            for row in 0..n {
                out[row * n + col] = v[row * n + src];
            }
        }
        out
    });
    SymmetricEigen { values, vectors }
}

fn tred2(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    let idx = |r: usize, c: usize| r * n + c;
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
                v[idx(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[idx(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    v[idx(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = 0.0;
    }
    v[idx(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

fn tql2(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize, want_vectors: bool) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::EigenNoConvergence { index: None });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if want_vectors {
                        for k in 0..n {
                            let hk = v[k * n + i + 1];
                            v[k * n + i + 1] = s * v[k * n + i] + c * hk;
                            v[k * n + i] = c * v[k * n + i] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Eigenvalues of a complex Hermitian matrix (row-major), ascending.
///
/// Uses the real embedding `[[Re A, -Im A], [Im A, Re A]]`, whose spectrum is
/// that of `A` with every eigenvalue doubled.
pub fn hermitian_eigenvalues(a: &[Complex64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, found: a.len() });
    }
    let m = 2 * n;
    let mut emb = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            // Symmetrize explicitly so round-off in `a` cannot leak in.
            let z = (a[i * n + j] + a[j * n + i].conj()) * 0.5;
            emb[i * m + j] = z.re;
            emb[(i + n) * m + (j + n)] = z.re;
            emb[i * m + (j + n)] = -z.im;
            emb[(i + n) * m + j] = z.im;
        }
    }
    let eig = symmetric_eigen(&emb, m, false)?;
    Ok(eig.values.iter().step_by(2).copied().collect())
}

/// `A·B` for square row-major complex matrices.
pub fn cmatmul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            let row = &b[k * n..(k + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            for (o, &bkj) in dst.iter_mut().zip(row) {
                *o += aik * bkj;
            }
        }
    }
    out
}

/// Conjugate transpose.
pub fn adjoint(a: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j].conj();
        }
    }
    out
}

/// `[A, B] = AB − BA`.
pub fn commutator(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let ab = cmatmul(a, b, n);
    let ba = cmatmul(b, a, n);
    ab.iter().zip(&ba).map(|(x, y)| x - y).collect()
}

/// Largest entry modulus.
pub fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
