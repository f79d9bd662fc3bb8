//! Time integration of the kinetics and limit-cycle detection.
//!
//! Cycles are fixed points of the return map on the half-line
//! `{S = S2, I > I2}`, which every orbit around `E2` crosses with `dS/dt < 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{require_endemic_high, ModelParams};
use crate::roots;

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Tolerances for the embedded pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeTolerance {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
}

impl OdeTolerance {
    pub fn new(rtol: f64) -> Self {
        Self {
            rtol,
            atol: rtol * 1e-2,
            h_max: f64::INFINITY,
        }
    }
}

impl Default for OdeTolerance {
    fn default() -> Self {
        Self::new(1e-10)
    }
}

/// One Dormand–Prince step; returns the 5th-order solution, the error
/// estimate and the derivative at the new point (FSAL).
fn dp_step<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    f: &F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N], [f64; N]) {
    let mut k = [[0.0; N]; 7];
    k[0] = *k1;
    let mut y_new = *y;
    for s in 1..7 {
        let mut ys = *y;
        for (i, v) in ys.iter_mut().enumerate() {
            for (j, kj) in k.iter().enumerate().take(s) {
                *v += h * A[s][j] * kj[i];
            }
        }
        k[s] = f(t + C[s] * h, &ys);
        if s == 6 {
            y_new = ys;
        }
    }
    let mut err = [0.0; N];
    for (i, e) in err.iter_mut().enumerate() {
        *e = h * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>();
    }
    (y_new, err, k[6])
}

/// What the observer wants after each accepted step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Adaptive integration from `t0` to `t_end`, which may lie before `t0`.
///
/// `observe(t_prev, y_prev, t, y)` runs after every accepted step. The final
/// time and state are returned.
pub fn dopri45<const N: usize, F, O>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    tol: OdeTolerance,
    mut observe: O,
) -> Result<(f64, [f64; N])>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &[f64; N], f64, &[f64; N]) -> Control,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let scale0 = y.iter().fold(0.0f64, |m, v| m.max(v.abs())) * tol.rtol + tol.atol;
    let d0 = k1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut h = if d0 > 0.0 {
        (0.01 * scale0 / d0).powf(0.2).min(span).min(tol.h_max)
    } else {
        span.min(tol.h_max) * 1e-3
    };
    h = h.max(1e-12 * span.max(1.0));
    let mut rejections = 0usize;
    while (t_end - t) * dir > 0.0 {
        if h > (t_end - t).abs() {
            h = (t_end - t).abs();
        }
        let (y_new, err, k7) = dp_step(&f, t, &y, &k1, dir * h);
        let mut acc = 0.0;
        for i in 0..N {
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            acc += (err[i] / sc).powi(2);
        }
        let err_norm = (acc / N as f64).sqrt();
        if !err_norm.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.25;
            rejections += 1;
        } else if err_norm <= 1.0 {
            let t_new = t + dir * h;
            let prev = y;
            let t_prev = t;
            t = t_new;
            y = y_new;
            k1 = k7;
            rejections = 0;
            if observe(t_prev, &prev, t, &y) == Control::Stop {
                return Ok((t, y));
            }
            let fac = if err_norm == 0.0 {
                5.0
            } else {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * fac).min(tol.h_max);
        } else {
            h *= (0.9 * err_norm.powf(-0.2)).clamp(0.1, 1.0);
            rejections += 1;
        }
        if h < 1e-14 * t.abs().max(1.0) || rejections > 100 {
            return Err(Error::Numerical {
                t,
                reason: format!("step size collapsed to {h:e}"),
            });
        }
    }
    Ok((t, y))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OdeTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 2]>,
}

impl OdeTrajectory {
    pub fn last(&self) -> Option<(f64, [f64; 2])> {
        Some((*self.times.last()?, *self.states.last()?))
    }
}

/// Integration failure carrying everything computed before it.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegrationFailure {
    pub error: Error,
    pub partial: OdeTrajectory,
}

impl std::fmt::Display for IntegrationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} after {} accepted steps",
            self.error,
            self.partial.times.len().saturating_sub(1)
        )
    }
}

impl std::error::Error for IntegrationFailure {}

impl From<IntegrationFailure> for Error {
    fn from(e: IntegrationFailure) -> Self {
        e.error
    }
}

pub fn kinetics_field(params: &ModelParams) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
    move |_, y| {
        let (ds, di) = params.reaction(y[0], y[1]);
        [ds, di]
    }
}

/// Integrates the kinetics from `initial` over `[0, t_end]`, keeping every step.
pub fn integrate_ode(
    params: &ModelParams,
    initial: (f64, f64),
    t_end: f64,
    tol: OdeTolerance,
) -> std::result::Result<OdeTrajectory, IntegrationFailure> {
    let mut traj = OdeTrajectory {
        times: vec![0.0],
        states: vec![[initial.0, initial.1]],
    };
    if !(initial.0 >= 0.0 && initial.1 >= 0.0) {
        return Err(IntegrationFailure {
            error: Error::Precondition(format!("initial state {initial:?} is not non-negative")),
            partial: traj,
        });
    }
    let f = kinetics_field(params);
    let result = dopri45(f, 0.0, [initial.0, initial.1], t_end, tol, |_, _, t, y| {
        traj.times.push(t);
        traj.states.push(*y);
        Control::Continue
    });
    match result {
        Ok(_) => Ok(traj),
        Err(error) => Err(IntegrationFailure {
            error,
            partial: traj,
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeDirection {
    Forward,
    Reverse,
}

impl TimeDirection {
    fn sign(self) -> f64 {
        match self {
            TimeDirection::Forward => 1.0,
            TimeDirection::Reverse => -1.0,
        }
    }
}

/// One return to the section.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionReturn {
    pub i: f64,
    /// Elapsed time, always positive.
    pub period: f64,
    pub i_min: f64,
    pub i_max: f64,
}

/// The section `S = S2`, `I > I2`, and the return map on it.
#[derive(Clone, Copy, Debug)]
pub struct PoincareSection<'a> {
    pub params: &'a ModelParams,
    pub s2: f64,
    pub i2: f64,
    pub tol: OdeTolerance,
    /// Give up on a return after this long.
    pub max_return_time: f64,
}

impl<'a> PoincareSection<'a> {
    pub fn new(params: &'a ModelParams, tol: OdeTolerance) -> Result<Self> {
        let e2 = require_endemic_high(params)?;
        let j = crate::kinetics::ode_jacobian(params, &e2);
        let omega = j.eigenvalues()[0].im.abs().max(1e-3);
        Ok(Self {
            params,
            s2: e2.s,
            i2: e2.i,
            tol,
            max_return_time: 50.0 * std::f64::consts::TAU / omega,
        })
    }

    /// Upper end of the section inside the invariant region.
    pub fn i_upper(&self) -> f64 {
        self.params.carrying_total() - self.s2
    }

    fn in_region(&self, y: &[f64; 2]) -> bool {
        let slack = 1e-6 * self.params.carrying_total();
        y[0] >= -slack && y[1] >= -slack && y[0] + y[1] <= self.params.carrying_total() + slack
    }

    /// Locates the section crossing inside an accepted step by re-stepping
    /// from its start with a shortened step.
    fn refine_crossing(
        &self,
        dir: TimeDirection,
        t0: f64,
        y0: &[f64; 2],
        t1: f64,
    ) -> (f64, [f64; 2]) {
        let f = kinetics_field(self.params);
        let k1 = f(t0, y0);
        let s2 = self.s2;
        let step = |theta: f64| {
            let h = dir.sign() * theta * (t1 - t0);
            dp_step(&f, t0, y0, &k1, h).0
        };
        let theta = roots::brent_tol(|th| step(th)[0] - s2, 0.0, 1.0, 1e-15, roots::MAX_ITER)
            .unwrap_or(1.0);
        (t0 + theta * (t1 - t0), step(theta))
    }

    /// Integrates from `start` and reports every crossing of the section in
    /// the orientation of `dir`, stopping after `max_crossings` or at `t_max`.
    pub fn crossings(
        &self,
        start: [f64; 2],
        dir: TimeDirection,
        t_max: f64,
        max_crossings: usize,
    ) -> Result<(Vec<(f64, f64)>, SeedEnd)> {
        let f = kinetics_field(self.params);
        let sgn = dir.sign();
        let field = move |t: f64, y: &[f64; 2]| {
            let v = f(t, y);
            [sgn * v[0], sgn * v[1]]
        };
        let mut out = Vec::new();
        let mut escaped = false;
        let s2 = self.s2;
        let i2 = self.i2;
        let (_, end) = dopri45(field, 0.0, start, t_max, self.tol, |t0, y0, t1, y1| {
            if !self.in_region(y1) {
                escaped = true;
                return Control::Stop;
            }
            // Positive-time orientation crosses with S decreasing; reversed
            // time sees S increasing.
            let crossed = match dir {
                TimeDirection::Forward => y0[0] > s2 && y1[0] <= s2,
                TimeDirection::Reverse => y0[0] < s2 && y1[0] >= s2,
            };
            if crossed && 0.5 * (y0[1] + y1[1]) > i2 {
                let (tc, yc) = self.refine_crossing(dir, t0, y0, t1);
                if yc[1] > i2 {
                    out.push((tc, yc[1]));
                    if out.len() >= max_crossings {
                        return Control::Stop;
                    }
                }
            }
            Control::Continue
        })?;
        let fate = if escaped {
            SeedEnd::Escaped
        } else {
            SeedEnd::State(end)
        };
        Ok((out, fate))
    }

    /// First return of the orbit through `(S2, i)` in the given direction.
    pub fn return_map(&self, i: f64, dir: TimeDirection) -> Result<SectionReturn> {
        let f = kinetics_field(self.params);
        let sgn = dir.sign();
        let field = move |t: f64, y: &[f64; 2]| {
            let v = f(t, y);
            [sgn * v[0], sgn * v[1]]
        };
        let s2 = self.s2;
        let i2 = self.i2;
        let mut i_min = i;
        let mut i_max = i;
        let mut hit: Option<(f64, f64)> = None;
        let mut escaped = false;
        dopri45(field, 0.0, [s2, i], self.max_return_time, self.tol, |t0, y0, t1, y1| {
            if !self.in_region(y1) {
                escaped = true;
                return Control::Stop;
            }
            i_min = i_min.min(y1[1]);
            i_max = i_max.max(y1[1]);
            let crossed = match dir {
                TimeDirection::Forward => y0[0] > s2 && y1[0] <= s2,
                TimeDirection::Reverse => y0[0] < s2 && y1[0] >= s2,
            };
            if crossed && t0 > 0.0 && 0.5 * (y0[1] + y1[1]) > i2 {
                let (tc, yc) = self.refine_crossing(dir, t0, y0, t1);
                hit = Some((tc, yc[1]));
                return Control::Stop;
            }
            Control::Continue
        })?;
        if escaped {
            return Err(Error::NotFound(format!(
                "orbit from I = {i} leaves the invariant region"
            )));
        }
        let (period, i_next) = hit.ok_or_else(|| {
            Error::NotFound(format!("no return to the section from I = {i}"))
        })?;
        Ok(SectionReturn {
            i: i_next,
            period,
            i_min,
            i_max,
        })
    }

    /// Forward displacement `P(i) - i`.
    pub fn displacement(&self, i: f64) -> Result<f64> {
        Ok(self.return_map(i, TimeDirection::Forward)?.i - i)
    }
}

/// How a seed run ended.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SeedEnd {
    State([f64; 2]),
    Escaped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleStability {
    Stable,
    Unstable,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitCycle {
    pub period: f64,
    /// Where the cycle meets the section.
    pub section_point: (f64, f64),
    pub stability: CycleStability,
    /// `max I - min I` over one revolution.
    pub amplitude: f64,
    /// Derivative of the return map at the fixed point.
    pub multiplier: f64,
    /// `|P(I) - I| / I` at the reported point.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SeedFate {
    /// Converges to the cycle with this index in the census.
    Cycle(usize),
    /// Spirals into `E2`.
    Equilibrium,
    /// Leaves the invariant region (only possible in reversed time).
    Escaped,
    /// Return sequence too short, or no fixed point in the direction of travel.
    NoCycle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: (f64, f64),
    pub direction: TimeDirection,
    pub crossings: usize,
    pub fate: SeedFate,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CycleCensus {
    /// Ordered by increasing section point.
    pub cycles: Vec<LimitCycle>,
    pub seeds: Vec<SeedReport>,
}

impl CycleCensus {
    pub fn stable(&self) -> impl Iterator<Item = &LimitCycle> {
        self.cycles
            .iter()
            .filter(|c| c.stability == CycleStability::Stable)
    }

    pub fn unstable(&self) -> impl Iterator<Item = &LimitCycle> {
        self.cycles
            .iter()
            .filter(|c| c.stability == CycleStability::Unstable)
    }
}

/// Settings for [`find_limit_cycles`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleSearch {
    pub t_transient: f64,
    pub t_measure: f64,
    /// Crossings required in the measurement window.
    pub min_crossings: usize,
    /// Convergence threshold on `|P(I) - I| / I`.
    pub residual_tol: f64,
    pub tol: OdeTolerance,
}

impl Default for CycleSearch {
    fn default() -> Self {
        Self {
            t_transient: 500.0,
            t_measure: 100.0,
            min_crossings: 8,
            residual_tol: 1e-7,
            tol: OdeTolerance::new(1e-11),
        }
    }
}

/// Finds the first zero of the displacement starting at `from` and moving
/// towards `limit`, where the sign of the displacement flips.
fn first_root_towards(
    section: &PoincareSection,
    from: f64,
    limit: f64,
) -> Result<Option<f64>> {
    let d0 = section.displacement(from)?;
    let gap = limit - from;
    if gap.abs() <= 0.0 {
        return Ok(None);
    }
    let max_step = gap.abs() / 40.0;
    let mut inc = (gap.abs() * 1e-4).min(max_step);
    let mut prev = (from, d0);
    loop {
        let x = prev.0 + gap.signum() * inc;
        let reached = (limit - x) * gap.signum() <= 0.0;
        let x = if reached { limit } else { x };
        let dx = match section.displacement(x) {
            Ok(v) => v,
            Err(_) => return Ok(None),
        };
        if dx == 0.0 || dx.signum() != prev.1.signum() {
            let (lo, hi) = if prev.0 < x { (prev.0, x) } else { (x, prev.0) };
            let root = roots::brent_tol(
                |i| section.displacement(i).unwrap_or(f64::NAN),
                lo,
                hi,
                1e-13,
                roots::MAX_ITER,
            )?;
            return Ok(Some(root));
        }
        if reached {
            return Ok(None);
        }
        prev = (x, dx);
        inc = (inc * 1.6).min(max_step);
    }
}

fn characterise(section: &PoincareSection, i: f64, search: &CycleSearch) -> Result<LimitCycle> {
    let ret = section.return_map(i, TimeDirection::Forward)?;
    let residual = (ret.i - i).abs() / i;
    if residual > search.residual_tol {
        return Err(Error::NoConvergence {
            iterations: roots::MAX_ITER,
        });
    }
    let h = 1e-5 * (i - section.i2);
    let up = section.return_map(i + h, TimeDirection::Forward)?.i;
    let down = section.return_map(i - h, TimeDirection::Forward)?.i;
    let multiplier = (up - down) / (2.0 * h);
    Ok(LimitCycle {
        period: ret.period,
        section_point: (section.s2, i),
        stability: if multiplier < 1.0 {
            CycleStability::Stable
        } else {
            CycleStability::Unstable
        },
        amplitude: ret.i_max - ret.i_min,
        multiplier,
        residual,
    })
}

/// Follows one seed in one time direction and returns the cycle it settles
/// on, if any.
fn follow_seed(
    section: &PoincareSection,
    seed: (f64, f64),
    dir: TimeDirection,
    search: &CycleSearch,
) -> Result<(usize, Option<f64>, SeedFate)> {
    let (transient, end) =
        section.crossings([seed.0, seed.1], dir, search.t_transient, usize::MAX)?;
    let start = match end {
        SeedEnd::Escaped => return Ok((transient.len(), None, SeedFate::Escaped)),
        SeedEnd::State(y) => y,
    };
    let (window, end) = section.crossings(start, dir, search.t_measure, usize::MAX)?;
    if end == SeedEnd::Escaped {
        return Ok((window.len(), None, SeedFate::Escaped));
    }
    let n = window.len();
    if n < 2 || n < search.min_crossings {
        return Ok((n, None, SeedFate::NoCycle));
    }
    let last = window[n - 1].1;
    let prev = window[n - 2].1;
    if (last - prev).abs() <= 1e-9 * last {
        // Already on a cycle; the direction of travel is rounding noise.
        return Ok((n, bracket_near(section, last)?, SeedFate::NoCycle));
    }
    // Iterates move towards the attractor of this direction, so the fixed
    // point lies beyond `prev`.
    let heading_down = last < prev;
    let limit = if heading_down {
        section.i2 + 1e-4 * (last - section.i2)
    } else {
        section.i_upper()
    };
    match first_root_towards(section, prev, limit)? {
        Some(root) => Ok((n, Some(root), SeedFate::NoCycle)),
        None if heading_down && dir == TimeDirection::Forward => {
            Ok((n, None, SeedFate::Equilibrium))
        }
        None => Ok((n, None, SeedFate::NoCycle)),
    }
}

/// Brackets a zero of the displacement in a widening interval around `x`.
fn bracket_near(section: &PoincareSection, x: f64) -> Result<Option<f64>> {
    let mut w = 1e-7 * (x - section.i2);
    for _ in 0..40 {
        let (lo, hi) = (x - w, x + w);
        if lo <= section.i2 {
            break;
        }
        let (dl, dh) = (section.displacement(lo)?, section.displacement(hi)?);
        if dl.signum() != dh.signum() {
            let root = roots::brent_tol(
                |i| section.displacement(i).unwrap_or(f64::NAN),
                lo,
                hi,
                1e-13,
                roots::MAX_ITER,
            )?;
            return Ok(Some(root));
        }
        w *= 2.0;
    }
    Ok(None)
}

/// Cycle census around `E2` from the given seeds.
///
/// Each seed is followed forward (stable cycles) and in reversed time
/// (unstable cycles). The observed section returns give the direction of
/// travel; the displacement `P(I) - I` is then bracketed in that direction
/// and its zero refined by Brent's method, since near a saddle-node of cycles
/// plain iteration contracts by only about `1e-6` per revolution.
pub fn find_limit_cycles(
    params: &ModelParams,
    seeds: &[(f64, f64)],
    search: CycleSearch,
) -> Result<CycleCensus> {
    let section = PoincareSection::new(params, search.tol)?;
    let jobs: Vec<((f64, f64), TimeDirection)> = seeds
        .iter()
        .flat_map(|&s| [(s, TimeDirection::Forward), (s, TimeDirection::Reverse)])
        .collect();
    let runs: Vec<Result<(usize, Option<f64>, SeedFate)>> = jobs
        .par_iter()
        .map(|&(seed, dir)| follow_seed(&section, seed, dir, &search))
        .collect();
    let mut census = CycleCensus::default();
    let mut pending = Vec::new();
    for (&(seed, direction), run) in jobs.iter().zip(runs) {
        let (crossings, root, fate) = run?;
        let fate = match root {
            Some(i) => {
                let idx = match census
                    .cycles
                    .iter()
                    .position(|c| (c.section_point.1 - i).abs() <= 1e-6 * i)
                {
                    Some(idx) => idx,
                    None => {
                        census.cycles.push(characterise(&section, i, &search)?);
                        census.cycles.len() - 1
                    }
                };
                pending.push(census.seeds.len());
                SeedFate::Cycle(idx)
            }
            None => fate,
        };
        census.seeds.push(SeedReport {
            seed,
            direction,
            crossings,
            fate,
        });
    }
    // Sort cycles by section point and remap the seed references.
    let mut order: Vec<usize> = (0..census.cycles.len()).collect();
    order.sort_by(|&a, &b| {
        census.cycles[a]
            .section_point
            .1
            .total_cmp(&census.cycles[b].section_point.1)
    });
    let mut remap = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }
    census.cycles = order.iter().map(|&i| census.cycles[i]).collect();
    for idx in pending {
        if let SeedFate::Cycle(c) = census.seeds[idx].fate {
            census.seeds[idx].fate = SeedFate::Cycle(remap[c]);
        }
    }
    Ok(census)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay_is_accurate() {
        let (t, y) = dopri45(
            |_, y: &[f64; 1]| [-y[0]],
            0.0,
            [1.0],
            5.0,
            OdeTolerance::new(1e-12),
            |_, _, _, _| Control::Continue,
        )
        .unwrap();
        assert_eq!(t, 5.0);
        assert_relative_eq!(y[0], (-5.0f64).exp(), max_relative = 1e-10);
    }

    #[test]
    fn integrates_backwards() {
        let (_, y) = dopri45(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            -std::f64::consts::FRAC_PI_2,
            OdeTolerance::new(1e-12),
            |_, _, _, _| Control::Continue,
        )
        .unwrap();
        assert_relative_eq!(y[0], -1.0, max_relative = 1e-9);
        assert!(y[1].abs() < 1e-9);
    }

    #[test]
    fn susceptible_axis_is_invariant() {
        let p = ModelParams::new(0.4, 0.1, 0.1, 0.1, 0.2, 0.3).unwrap();
        let traj = integrate_ode(&p, (1.0, 0.0), 200.0, OdeTolerance::default()).unwrap();
        assert!(traj.states.iter().all(|s| s[1] == 0.0));
        let (_, last) = traj.last().unwrap();
        assert!((last[0] - 4.0).abs() < 1e-6);
    }

    #[test]
    fn harmonic_return_map() {
        // Stable focus: returns move inwards and the reversed map undoes them.
        let p = ModelParams::new(1.0, 1.0, 12.0, 2.0, 10.0, 0.0522).unwrap();
        let sec = PoincareSection::new(&p, OdeTolerance::new(1e-11)).unwrap();
        let i0 = sec.i2 + 0.01;
        let r = sec.return_map(i0, TimeDirection::Forward).unwrap();
        assert!(r.i < i0 && r.i > sec.i2);
        let back = sec.return_map(r.i, TimeDirection::Reverse).unwrap();
        assert_relative_eq!(back.i, i0, max_relative = 1e-8);
        assert_relative_eq!(back.period, r.period, max_relative = 1e-8);
    }

    #[test]
    fn two_cycles_between_hopf_and_fold() {
        let p = ModelParams::new(1.0, 1.0, 12.0, 2.0, 10.0, 0.052264417).unwrap();
        let census = find_limit_cycles(
            &p,
            &[(0.51, 0.086), (0.65, 0.14)],
            CycleSearch::default(),
        )
        .unwrap();
        assert_eq!(census.stable().count(), 1);
        assert_eq!(census.unstable().count(), 1);
        let inner = census.cycles[0];
        assert_eq!(inner.stability, CycleStability::Unstable);
        assert_eq!(census.seeds[0].fate, SeedFate::Equilibrium);
        assert_eq!(census.seeds[2].fate, SeedFate::Cycle(1));
        // The unstable cycle is an attracting one of the reversed field.
        let sec = PoincareSection::new(&p, OdeTolerance::new(1e-11)).unwrap();
        let back = sec
            .return_map(inner.section_point.1, TimeDirection::Reverse)
            .unwrap();
        assert!((back.i - inner.section_point.1).abs() < 1e-9);
        assert!((back.period / inner.period - 1.0).abs() < 1e-4);
    }

    #[test]
    fn no_cycle_before_hopf() {
        let p = ModelParams::new(1.0, 1.0, 12.0, 2.0, 10.0, 0.0522).unwrap();
        let census =
            find_limit_cycles(&p, &[(0.65, 0.14), (0.4, 0.08)], CycleSearch::default()).unwrap();
        assert!(census.cycles.is_empty(), "{:?}", census.cycles);
        assert!(census
            .seeds
            .iter()
            .filter(|s| s.direction == TimeDirection::Forward)
            .all(|s| s.fate == SeedFate::Equilibrium));
    }

    #[test]
    fn single_cycle_past_hopf() {
        let p = ModelParams::new(1.0, 1.0, 12.0, 2.0, 10.0, 0.052277264).unwrap();
        let census =
            find_limit_cycles(&p, &[(0.65, 0.14), (0.4, 0.08)], CycleSearch::default()).unwrap();
        assert_eq!(census.cycles.len(), 1, "{:?}", census.cycles);
        assert_eq!(census.cycles[0].stability, CycleStability::Stable);
        assert!(census.cycles[0].residual <= 1e-7);
        for s in census.seeds.iter().filter(|s| s.direction == TimeDirection::Forward) {
            assert_eq!(s.fate, SeedFate::Cycle(0));
        }
    }
}
