//! Named parameter sets and simulation recipes for the standard scenarios.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{require_endemic_high, Equilibrium, ModelParams};
use crate::pattern::{classify_pattern, PatternReport};
use crate::pde::{perturbed_state, simulate, FieldState, Grid1D, SimConfig, SimulationFailure};
use crate::spectral::DiffusionParams;

/// Turing-table kinetics: `R0 = 4/3` with a single endemic state.
pub fn turing_table_params() -> ModelParams {
    ModelParams::new(0.4, 0.1, 0.1, 0.1, 0.2, 0.3).expect("valid preset")
}

/// Kinetics near the generalized Hopf point, `(b, β)` still free.
pub fn cycle_params(b: f64, beta: f64) -> Result<ModelParams> {
    ModelParams::new(1.0, 1.0, beta, 2.0, 10.0, b)
}

/// Slow-turnover kinetics used for the Turing–Hopf scenarios.
pub fn turing_hopf_params(beta: f64) -> Result<ModelParams> {
    ModelParams::new(1.0, 0.01, beta, 0.1, 10.0, 0.03)
}

/// Fixed `b` values at `β = 12` with zero, one and two limit cycles.
pub const B_NO_CYCLE: f64 = 0.0522;
pub const B_ONE_CYCLE: f64 = 0.052277264;
pub const B_TWO_CYCLES: f64 = 0.052264417;
pub const CYCLE_BETA: f64 = 12.0;

pub const DEFAULT_ELL: f64 = 5.0;
pub const DEFAULT_N: usize = 512;
pub const DEFAULT_DT: f64 = 0.01;

/// How to build the initial field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum InitialSpec {
    /// `E2 + amplitude·cos(wavenumber·x)` in both fields.
    AroundEndemic { amplitude: f64, wavenumber: f64 },
    /// `(s, i) + amplitude·cos(wavenumber·x)`.
    AroundPoint {
        s: f64,
        i: f64,
        amplitude: f64,
        wavenumber: f64,
    },
}

impl InitialSpec {
    pub fn build(&self, params: &ModelParams, grid: &Grid1D) -> Result<FieldState> {
        match *self {
            InitialSpec::AroundEndemic {
                amplitude,
                wavenumber,
            } => {
                let e2 = require_endemic_high(params)?;
                perturbed_state(&e2, grid, amplitude, wavenumber)
            }
            InitialSpec::AroundPoint {
                s,
                i,
                amplitude,
                wavenumber,
            } => {
                let base = Equilibrium {
                    s,
                    i,
                    kind: crate::kinetics::EquilibriumKind::Degenerate,
                };
                perturbed_state(&base, grid, amplitude, wavenumber)
            }
        }
    }
}

/// A complete simulation setup with its analysis window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub name: String,
    pub params: ModelParams,
    pub diff: DiffusionParams,
    pub config: SimConfig,
    pub initial: InitialSpec,
    pub window: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecipeRun {
    pub snapshots: Vec<FieldState>,
    pub report: PatternReport,
}

impl Recipe {
    #[allow(clippy::too_many_arguments)]
    fn new(
        name: &str,
        params: ModelParams,
        r1: f64,
        r2: f64,
        t_end: f64,
        stride: usize,
        initial: InitialSpec,
        window: (f64, f64),
    ) -> Result<Self> {
        let grid = Grid1D::new(DEFAULT_ELL, DEFAULT_N)?;
        Ok(Self {
            name: name.to_string(),
            params,
            diff: DiffusionParams::new(r1, r2, DEFAULT_ELL)?,
            config: SimConfig::new(grid, DEFAULT_DT, t_end, stride),
            initial,
            window,
        })
    }

    pub fn initial_state(&self) -> Result<FieldState> {
        self.initial.build(&self.params, &self.config.grid)
    }

    /// Replaces the grid, keeping the domain.
    pub fn with_points(mut self, n: usize) -> Result<Self> {
        self.config.grid = Grid1D::new(self.config.grid.ell, n)?;
        Ok(self)
    }

    pub fn simulate(&self) -> std::result::Result<Vec<FieldState>, SimulationFailure> {
        let init = self.initial_state().map_err(|error| SimulationFailure {
            error,
            step: 0,
            last_good: FieldState::uniform(0.0, 0, 0.0, 0.0),
            snapshots: Vec::new(),
        })?;
        simulate(&self.params, &self.diff, &self.config, &init)
    }

    pub fn run(&self) -> Result<RecipeRun> {
        let snapshots = self.simulate()?;
        let report = classify_pattern(&self.config.grid, &snapshots, self.window)?;
        Ok(RecipeRun { snapshots, report })
    }

    /// Looks a recipe up by name.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "steady" => steady_recipe(),
            "turing" => turing_recipe(),
            "homogeneous-cycle" => homogeneous_cycle_recipe(),
            "turing-hopf" => turing_hopf_recipe(),
            "transient" => transient_recipe(),
            other => Err(Error::NotFound(format!("no recipe called `{other}`"))),
        }
    }

    pub const NAMES: [&'static str; 5] = [
        "steady",
        "turing",
        "homogeneous-cycle",
        "turing-hopf",
        "transient",
    ];
}

const DEFAULT_PERTURBATION: InitialSpec = InitialSpec::AroundEndemic {
    amplitude: 0.01,
    wavenumber: 0.4,
};

/// Turing-table kinetics at `r1 = 1`: perturbations decay.
pub fn steady_recipe() -> Result<Recipe> {
    Recipe::new(
        "steady",
        turing_table_params(),
        1.0,
        0.01,
        1000.0,
        100,
        DEFAULT_PERTURBATION,
        (800.0, 1000.0),
    )
}

/// Turing-table kinetics at `r1 = 4.6028`: stationary stripes.
pub fn turing_recipe() -> Result<Recipe> {
    Recipe::new(
        "turing",
        turing_table_params(),
        4.6028,
        0.01,
        3000.0,
        100,
        DEFAULT_PERTURBATION,
        (2500.0, 3000.0),
    )
}

/// One-cycle kinetics with equal slow diffusion: a homogeneous oscillation.
///
/// The run starts from the point the ODE phase portrait uses, since from
/// `E2` the cycle grows too slowly to be seen in a practical run. The tiny
/// cosine ripple only checks that the oscillation stays homogeneous: with
/// equal slow diffusion any phase lag along `x` would take thousands of time
/// units to smooth out.
pub fn homogeneous_cycle_recipe() -> Result<Recipe> {
    Recipe::new(
        "homogeneous-cycle",
        cycle_params(B_ONE_CYCLE, CYCLE_BETA)?,
        0.01,
        0.01,
        300.0,
        2,
        InitialSpec::AroundPoint {
            s: 0.65,
            i: 0.14,
            amplitude: 1e-5,
            wavenumber: 0.4,
        },
        (150.0, 300.0),
    )
}

/// Close to the (4,3) Turing–Hopf point.
pub fn turing_hopf_recipe() -> Result<Recipe> {
    Recipe::new(
        "turing-hopf",
        turing_hopf_params(0.00734)?,
        0.07208,
        0.01,
        1500.0,
        50,
        DEFAULT_PERTURBATION,
        (750.0, 1500.0),
    )
}

/// Homogeneous oscillation that later breaks into a spatial pattern.
pub fn transient_recipe() -> Result<Recipe> {
    Recipe::new(
        "transient",
        turing_hopf_params(0.0094)?,
        0.07,
        0.01,
        5000.0,
        100,
        DEFAULT_PERTURBATION,
        (4000.0, 5000.0),
    )
}
