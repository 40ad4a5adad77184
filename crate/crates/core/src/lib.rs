//! Spectral form factor laboratory: the numerical core.
//!
//! Everything in this crate is a pure function of its inputs and builds
//! under `no_std` with `alloc`. Transcendental functions go through `libm`
//! so results are bit-identical regardless of which platform `std` is linked.
//!
//! Module map:
//!
//! - [`ensembles`]: GOE sampling, symmetric eigendecomposition, spectra.
//! - [`spectral`]: partition functions, SFF, moments, ensemble accumulators,
//!   relative variance, plateau and dip diagnostics.
//! - [`filters`]: frequency and eigenvalue filters, modified partition
//!   functions, free-energy deformation.
//! - [`channels`]: small density-matrix laboratory (dephasing, no-jump,
//!   mixed-unitary, instruments).
//! - [`liouvillian`]: vectorized superoperators and Liouvillian deformations.
//! - [`recovery`]: exact and Wiener deconvolution of frequency filters.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod channels;
pub mod ensembles;
mod error;
pub mod filters;
pub mod linalg;
pub mod liouvillian;
pub mod math;
pub mod quadrature;
pub mod recovery;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
