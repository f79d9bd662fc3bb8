//! Finite-difference solver for the reaction–diffusion system on `[0, ℓπ]`
//! with zero-flux boundaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{Equilibrium, ModelParams};
use crate::spectral::DiffusionParams;

/// Vertex-centred grid; node `j` sits at `x = j·dx`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub ell: f64,
    pub n: usize,
    pub dx: f64,
}

impl Grid1D {
    pub const MIN_POINTS: usize = 64;

    pub fn new(ell: f64, n: usize) -> Result<Self> {
        if !(ell.is_finite() && ell > 0.0) {
            return Err(Error::InvalidParameter {
                name: "ell",
                value: ell,
                reason: "must be positive",
            });
        }
        if n < Self::MIN_POINTS {
            return Err(Error::InvalidParameter {
                name: "n",
                value: n as f64,
                reason: "need at least 64 grid points",
            });
        }
        Ok(Self {
            ell,
            n,
            dx: Self::length_of(ell) / (n - 1) as f64,
        })
    }

    fn length_of(ell: f64) -> f64 {
        ell * std::f64::consts::PI
    }

    pub fn length(&self) -> f64 {
        Self::length_of(self.ell)
    }

    pub fn x(&self, j: usize) -> f64 {
        if j + 1 == self.n {
            self.length()
        } else {
            j as f64 * self.dx
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Trapezoid rule over the grid.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.n);
        let inner: f64 = f[1..self.n - 1].iter().sum();
        self.dx * (inner + 0.5 * (f[0] + f[self.n - 1]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub t: f64,
    pub s: Vec<f64>,
    pub i: Vec<f64>,
}

impl FieldState {
    pub fn uniform(t: f64, n: usize, s: f64, i: f64) -> Self {
        Self {
            t,
            s: vec![s; n],
            i: vec![i; n],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.s.iter().chain(&self.i).all(|v| v.is_finite())
    }

    pub fn min_value(&self) -> f64 {
        self.s.iter().chain(&self.i).copied().fold(f64::INFINITY, f64::min)
    }

    /// Integral of `S + I` over the domain.
    pub fn total_mass(&self, grid: &Grid1D) -> f64 {
        grid.integrate(&self.s) + grid.integrate(&self.i)
    }

    /// Largest pointwise difference from `other`, in either field.
    pub fn max_abs_diff(&self, other: &FieldState) -> f64 {
        self.s
            .iter()
            .zip(&other.s)
            .chain(self.i.iter().zip(&other.i))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrator {
    /// Crank–Nicolson diffusion with explicit-midpoint reaction.
    ImexCn,
    ExplicitRk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub integrator: Integrator,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_stride: usize,
    pub grid: Grid1D,
}

impl SimConfig {
    pub fn new(grid: Grid1D, dt: f64, t_end: f64, snapshot_stride: usize) -> Self {
        Self {
            integrator: Integrator::ImexCn,
            dt,
            t_end,
            snapshot_stride,
            grid,
        }
    }

    /// Largest stable explicit step for the given diffusion rates.
    pub fn cfl_limit(&self, diff: &DiffusionParams) -> f64 {
        let r = diff.r1.max(diff.r2);
        if r == 0.0 {
            f64::INFINITY
        } else {
            0.4 * self.grid.dx * self.grid.dx / (2.0 * r)
        }
    }

    pub fn validate(&self, diff: &DiffusionParams) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                value: self.dt,
                reason: "must be positive",
            });
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "t_end",
                value: self.t_end,
                reason: "must be non-negative",
            });
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidParameter {
                name: "snapshot_stride",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if self.integrator == Integrator::ExplicitRk4 && self.dt > self.cfl_limit(diff) {
            return Err(Error::InvalidParameter {
                name: "dt",
                value: self.dt,
                reason: "exceeds the explicit stability limit 0.4 dx^2 / (2 max(r1, r2))",
            });
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Second-order Laplacian with reflected ghost nodes.
pub fn laplacian_neumann(u: &[f64], dx: f64) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    laplacian_into(u, dx, &mut out);
    out
}

fn laplacian_into(u: &[f64], dx: f64, out: &mut [f64]) {
    let n = u.len();
    assert!(n >= 3, "laplacian needs at least 3 points");
    let inv = 1.0 / (dx * dx);
    out[0] = 2.0 * (u[1] - u[0]) * inv;
    out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) * inv;
    for j in 1..n - 1 {
        out[j] = (u[j - 1] - 2.0 * u[j] + u[j + 1]) * inv;
    }
}

/// Pre-factored tridiagonal matrix (Thomas algorithm).
#[derive(Clone, Debug)]
pub struct Tridiagonal {
    sub: Vec<f64>,
    // Modified super-diagonal and pivots from the forward sweep.
    sup: Vec<f64>,
    pivot: Vec<f64>,
}

impl Tridiagonal {
    /// `sub[j]` multiplies `x[j-1]` in row `j` and `sup[j]` multiplies
    /// `x[j+1]`; `sub[0]` and `sup[n-1]` are ignored.
    pub fn new(sub: Vec<f64>, diag: &[f64], sup: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        let mut c = vec![0.0; n];
        let mut pivot = vec![0.0; n];
        for j in 0..n {
            let p = if j == 0 {
                diag[0]
            } else {
                diag[j] - sub[j] * c[j - 1]
            };
            if p.abs() < 1e-300 {
                return Err(Error::Numerical {
                    t: 0.0,
                    reason: format!("zero pivot in tridiagonal row {j}"),
                });
            }
            pivot[j] = p;
            c[j] = if j + 1 < n { sup[j] / p } else { 0.0 };
        }
        Ok(Self {
            sub,
            sup: c,
            pivot,
        })
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] /= self.pivot[0];
        for j in 1..n {
            rhs[j] = (rhs[j] - self.sub[j] * rhs[j - 1]) / self.pivot[j];
        }
        for j in (0..n - 1).rev() {
            rhs[j] -= self.sup[j] * rhs[j + 1];
        }
    }

    /// `I - c·dx²·L` for the Neumann Laplacian `L`.
    fn implicit_diffusion(n: usize, c: f64) -> Result<Self> {
        let mut sub = vec![-c; n];
        let mut sup = vec![-c; n];
        let diag = vec![1.0 + 2.0 * c; n];
        sup[0] = -2.0 * c;
        sub[n - 1] = -2.0 * c;
        Self::new(sub, &diag, sup)
    }
}

/// The abort record of a run that produced non-finite values.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationFailure {
    pub error: Error,
    pub step: usize,
    pub last_good: FieldState,
    /// Snapshots written before the failure.
    pub snapshots: Vec<FieldState>,
}

impl std::fmt::Display for SimulationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} at step {} (last good state t = {})",
            self.error, self.step, self.last_good.t
        )
    }
}

impl std::error::Error for SimulationFailure {}

impl From<SimulationFailure> for Error {
    fn from(e: SimulationFailure) -> Self {
        e.error
    }
}

struct Stepper<'a> {
    params: &'a ModelParams,
    diff: DiffusionParams,
    dt: f64,
    dx: f64,
    scheme: Scheme,
    // scratch
    ls: Vec<f64>,
    li: Vec<f64>,
    rs: Vec<f64>,
    ri: Vec<f64>,
}

enum Scheme {
    Imex { ms: Tridiagonal, mi: Tridiagonal },
    Rk4,
}

impl<'a> Stepper<'a> {
    fn new(params: &'a ModelParams, diff: DiffusionParams, config: &SimConfig) -> Result<Self> {
        let n = config.grid.n;
        let dx = config.grid.dx;
        let scheme = match config.integrator {
            Integrator::ImexCn => {
                let c = |r: f64| 0.5 * config.dt * r / (dx * dx);
                Scheme::Imex {
                    ms: Tridiagonal::implicit_diffusion(n, c(diff.r1))?,
                    mi: Tridiagonal::implicit_diffusion(n, c(diff.r2))?,
                }
            }
            Integrator::ExplicitRk4 => Scheme::Rk4,
        };
        Ok(Self {
            params,
            diff,
            dt: config.dt,
            dx,
            scheme,
            ls: vec![0.0; n],
            li: vec![0.0; n],
            rs: vec![0.0; n],
            ri: vec![0.0; n],
        })
    }

    fn reaction(&mut self, s: &[f64], i: &[f64]) {
        for j in 0..s.len() {
            let (a, b) = self.params.reaction(s[j], i[j]);
            self.rs[j] = a;
            self.ri[j] = b;
        }
    }

    /// Full right-hand side into `(out_s, out_i)`.
    fn rhs(&mut self, s: &[f64], i: &[f64], out_s: &mut [f64], out_i: &mut [f64]) {
        laplacian_into(s, self.dx, &mut self.ls);
        laplacian_into(i, self.dx, &mut self.li);
        self.reaction(s, i);
        for j in 0..s.len() {
            out_s[j] = self.diff.r1 * self.ls[j] + self.rs[j];
            out_i[j] = self.diff.r2 * self.li[j] + self.ri[j];
        }
    }

    fn step(&mut self, state: &mut FieldState) {
        let n = state.s.len();
        let dt = self.dt;
        match self.scheme {
            Scheme::Imex { .. } => {
                // Midpoint predictor for the reaction, using the full operator.
                laplacian_into(&state.s, self.dx, &mut self.ls);
                laplacian_into(&state.i, self.dx, &mut self.li);
                self.reaction(&state.s, &state.i);
                let (r1, r2) = (self.diff.r1, self.diff.r2);
                let mut ms = vec![0.0; n];
                let mut mi = vec![0.0; n];
                for j in 0..n {
                    ms[j] = state.s[j] + 0.5 * dt * (r1 * self.ls[j] + self.rs[j]);
                    mi[j] = state.i[j] + 0.5 * dt * (r2 * self.li[j] + self.ri[j]);
                }
                // Explicit half of Crank–Nicolson, before the reaction
                // scratch is overwritten.
                for j in 0..n {
                    state.s[j] += 0.5 * dt * r1 * self.ls[j];
                    state.i[j] += 0.5 * dt * r2 * self.li[j];
                }
                self.reaction(&ms, &mi);
                for j in 0..n {
                    state.s[j] += dt * self.rs[j];
                    state.i[j] += dt * self.ri[j];
                }
                if let Scheme::Imex { ms, mi } = &self.scheme {
                    ms.solve_in_place(&mut state.s);
                    mi.solve_in_place(&mut state.i);
                }
            }
            Scheme::Rk4 => {
                let mut k = [[vec![0.0; n], vec![0.0; n]], [vec![0.0; n], vec![0.0; n]],
                    [vec![0.0; n], vec![0.0; n]], [vec![0.0; n], vec![0.0; n]]];
                let mut ys = state.s.clone();
                let mut yi = state.i.clone();
                let weights = [0.5, 0.5, 1.0];
                for stage in 0..4 {
                    let [ks, ki] = &mut k[stage];
                    self.rhs(&ys, &yi, ks, ki);
                    if stage < 3 {
                        let w = weights[stage] * dt;
                        for j in 0..n {
                            ys[j] = state.s[j] + w * k[stage][0][j];
                            yi[j] = state.i[j] + w * k[stage][1][j];
                        }
                    }
                }
                for j in 0..n {
                    state.s[j] += dt / 6.0
                        * (k[0][0][j] + 2.0 * k[1][0][j] + 2.0 * k[2][0][j] + k[3][0][j]);
                    state.i[j] += dt / 6.0
                        * (k[0][1][j] + 2.0 * k[1][1][j] + 2.0 * k[2][1][j] + k[3][1][j]);
                }
            }
        }
        state.t += dt;
    }
}

/// Runs the solver and hands every snapshot (including the initial state) to
/// `observe`. Returns the final state.
pub fn simulate_with<O: FnMut(&FieldState)>(
    params: &ModelParams,
    diff: &DiffusionParams,
    config: &SimConfig,
    initial: &FieldState,
    mut observe: O,
) -> std::result::Result<FieldState, SimulationFailure> {
    let fail = |error: Error| SimulationFailure {
        error,
        step: 0,
        last_good: initial.clone(),
        snapshots: Vec::new(),
    };
    diff.validate().map_err(fail)?;
    config.validate(diff).map_err(fail)?;
    let n = config.grid.n;
    if initial.s.len() != n || initial.i.len() != n {
        return Err(fail(Error::Precondition(format!(
            "initial state has {} points, grid has {n}",
            initial.s.len()
        ))));
    }
    if !initial.is_finite() || initial.min_value() < 0.0 {
        return Err(fail(Error::Precondition(
            "initial state must be finite and non-negative".into(),
        )));
    }
    let mut stepper = Stepper::new(params, *diff, config).map_err(fail)?;
    let steps = config.steps();
    let t0 = initial.t;
    let mut state = initial.clone();
    let mut last_good = initial.clone();
    observe(&state);
    for step in 1..=steps {
        stepper.step(&mut state);
        // Avoid drift from repeated addition of dt.
        state.t = t0 + step as f64 * config.dt;
        if !state.is_finite() {
            return Err(SimulationFailure {
                error: Error::Numerical {
                    t: state.t,
                    reason: format!("non-finite field value at step {step}"),
                },
                step,
                last_good,
                snapshots: Vec::new(),
            });
        }
        if step % config.snapshot_stride == 0 || step == steps {
            observe(&state);
            last_good.clone_from(&state);
        } else if step % 64 == 0 {
            last_good.clone_from(&state);
        }
    }
    Ok(state)
}

/// Runs the solver and keeps every snapshot.
pub fn simulate(
    params: &ModelParams,
    diff: &DiffusionParams,
    config: &SimConfig,
    initial: &FieldState,
) -> std::result::Result<Vec<FieldState>, SimulationFailure> {
    let mut snaps = Vec::with_capacity(config.steps() / config.snapshot_stride.max(1) + 2);
    let result = simulate_with(params, diff, config, initial, |s| snaps.push(s.clone()));
    match result {
        Ok(_) => Ok(snaps),
        Err(mut e) => {
            e.snapshots = snaps;
            Err(e)
        }
    }
}

/// Cosine perturbation of a constant state.
pub fn perturbed_state(
    eq: &Equilibrium,
    grid: &Grid1D,
    amplitude: f64,
    wavenumber: f64,
) -> Result<FieldState> {
    let xs = grid.xs();
    let s: Vec<f64> = xs
        .iter()
        .map(|x| eq.s + amplitude * (wavenumber * x).cos())
        .collect();
    let i: Vec<f64> = xs
        .iter()
        .map(|x| eq.i + amplitude * (wavenumber * x).cos())
        .collect();
    let state = FieldState { t: 0.0, s, i };
    if state.min_value() < 0.0 {
        return Err(Error::Precondition(format!(
            "perturbation amplitude {amplitude} drives the state negative"
        )));
    }
    Ok(state)
}

pub const DEFAULT_AMPLITUDE: f64 = 0.01;
pub const DEFAULT_WAVENUMBER: f64 = 0.4;

/// `S2 + 0.01 cos(0.4 x)`, `I2 + 0.01 cos(0.4 x)`.
pub fn default_initial(eq: &Equilibrium, grid: &Grid1D) -> Result<FieldState> {
    perturbed_state(eq, grid, DEFAULT_AMPLITUDE, DEFAULT_WAVENUMBER)
}
