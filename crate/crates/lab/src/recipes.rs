//! Figure-reproduction presets. Budgets and grids are listed in
//! `docs/recipes.md`.

use sff_core::filters::DeformationFn;

use crate::config::{EnsembleSpec, FilterSpec, GridSpec, RunConfig};
use crate::error::{LabError, Result};

pub const NAMES: [&str; 8] = ["fig1a", "fig1b", "fig1c", "fig2", "fig3", "fig4-freq", "fig4-eig", "fig5"];

/// Dimensions swept by the scaling recipes.
pub const FIG4_DIMS: [usize; 4] = [16, 32, 64, 128];
pub const FIG5_BETAS: [f64; 4] = [0.1, 0.3, 0.5, 1.0];

fn filter(name: &str, kappa: f64) -> Option<FilterSpec> {
    FilterSpec::from_name(name, Some(kappa), None, DeformationFn::Identity).expect("static filter")
}

fn base(count: u64, filter: Option<FilterSpec>, betas: Vec<f64>, kappas: Vec<f64>, grid: GridSpec) -> RunConfig {
    RunConfig { ensemble: EnsembleSpec { dim: 64, sigma: 1.0, count, base_seed: 0 }, filter, betas, kappas, grid }
}

/// Grid reaching the filtered plateaus, which settle well after `t = 1e4`.
pub fn long_grid() -> GridSpec {
    GridSpec::log(400, 1e-2, 1e6)
}

/// Grid for the scaling sweeps: long enough for κ = 0.2 to kill the
/// near-degenerate pairs of d = 128.
pub fn scaling_grid() -> GridSpec {
    GridSpec::log(360, 1e-2, 1e7)
}

pub fn recipe(name: &str) -> Result<RunConfig> {
    Ok(match name {
        "fig1a" => base(500, None, vec![0.1], vec![], GridSpec::default()),
        "fig1b" => base(500, filter("freq-gauss", 0.1), vec![0.1], vec![], long_grid()),
        "fig1c" => base(500, filter("eig-gauss", 0.1), vec![0.1], vec![], long_grid()),
        "fig2" => base(500, filter("freq-gauss", 0.01), vec![0.1, 0.5, 1.0, 2.0], vec![0.01, 0.1, 1.0], long_grid()),
        "fig3" => base(500, filter("eig-gauss", 0.01), vec![0.1, 0.5, 1.0, 2.0], vec![0.01, 0.1, 1.0], long_grid()),
        "fig4-freq" => base(1000, filter("freq-gauss", 0.2), vec![0.1, 0.5], vec![], scaling_grid()),
        "fig4-eig" => base(1000, filter("eig-gauss", 0.2), vec![0.1, 0.5], vec![], scaling_grid()),
        "fig5" => base(500, filter("freq-gauss", 0.2), FIG5_BETAS.to_vec(), vec![], scaling_grid()),
        other => return Err(LabError::Validation(format!("unknown recipe '{other}' ({})", NAMES.join(", ")))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_recipes_validate() {
        for n in NAMES {
            recipe(n).unwrap().validate().unwrap();
        }
        assert!(recipe("fig9").is_err());
    }
}
