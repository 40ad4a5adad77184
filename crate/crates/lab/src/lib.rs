//! Std companion to `sff-core`: parallel ensemble runs, sweeps, the oracle
//! suite, file formats and the `sff-lab` command line.

pub mod cli;
pub mod config;
mod error;
pub mod formats;
pub mod manifest;
pub mod recipes;
pub mod run;
pub mod scan;
pub mod svg;
pub mod verify;

pub use error::{LabError, Result};
