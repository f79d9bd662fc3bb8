//! Shared fixtures for the benchmarks.

use rdsir_core::kinetics::{endemic_high, Equilibrium};
use rdsir_core::pde::{default_initial, FieldState, Grid1D, SimConfig};
use rdsir_core::presets::{self, DEFAULT_ELL};
use rdsir_core::spectral::DiffusionParams;
use rdsir_core::ModelParams;

/// Kinetics of the threshold table with `E2`.
pub fn table_fixture() -> (ModelParams, Equilibrium) {
    let p = presets::turing_table_params();
    let e2 = endemic_high(&p).expect("E2 exists for the table kinetics");
    (p, e2)
}

/// Table kinetics in the patterning regime on an `n`-point grid, ready to
/// step for `steps` steps of the default size.
pub fn pde_fixture(n: usize, steps: usize) -> (ModelParams, DiffusionParams, SimConfig, FieldState) {
    let (p, e2) = table_fixture();
    let diff = DiffusionParams::new(4.6028, 0.01, DEFAULT_ELL).expect("valid diffusion");
    let grid = Grid1D::new(DEFAULT_ELL, n).expect("valid grid");
    let dt = presets::DEFAULT_DT;
    let config = SimConfig::new(grid, dt, dt * steps as f64, steps);
    let init = default_initial(&e2, &grid).expect("non-negative seed");
    (p, diff, config, init)
}
