//! Linearisation of the reaction–diffusion system about constant states on
//! `[0, ell pi]` with Neumann boundaries, mode by mode.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bifurcation::endemic_beta_floor;
use crate::error::{Error, Result};
use crate::kinetics::{
    ode_jacobian, quadratic_eigenvalues, require_endemic_high, Equilibrium, ModelParams,
    OdeJacobian,
};
use crate::roots;

/// Relative width within which two thresholds count as equal.
pub const THRESHOLD_TIE_TOL: f64 = 1e-12;
/// Relative distance at which `r1` is reported as sitting on a threshold.
pub const ON_THRESHOLD_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionParams {
    /// Susceptible diffusion rate.
    pub r1: f64,
    /// Infected diffusion rate.
    pub r2: f64,
    /// Domain scale; the domain is `[0, ell pi]`.
    pub ell: f64,
}

impl DiffusionParams {
    pub fn new(r1: f64, r2: f64, ell: f64) -> Result<Self> {
        let d = Self { r1, r2, ell };
        d.validate()?;
        Ok(d)
    }

    /// Zero diffusion rates are allowed (the kinetic limit).
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("r1", self.r1), ("r2", self.r2)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and non-negative",
                });
            }
        }
        if !(self.ell.is_finite() && self.ell > 0.0) {
            return Err(Error::InvalidParameter {
                name: "ell",
                value: self.ell,
                reason: "must be finite and strictly positive",
            });
        }
        Ok(())
    }

    pub fn with_r1(self, r1: f64) -> Self {
        Self { r1, ..self }
    }

    /// `(k / ell)^2`.
    #[inline]
    pub fn q2(&self, k: u32) -> f64 {
        let q = k as f64 / self.ell;
        q * q
    }
}

/// `J_k = J_0 - (k/ell)^2 diag(r1, r2)`.
pub fn shift_jacobian(j0: &OdeJacobian, diff: &DiffusionParams, k: u32) -> OdeJacobian {
    let q2 = diff.q2(k);
    OdeJacobian {
        d11: j0.d11 - q2 * diff.r1,
        d22: j0.d22 - q2 * diff.r2,
        ..*j0
    }
}

pub fn jk_matrix(
    params: &ModelParams,
    diff: &DiffusionParams,
    eq: &Equilibrium,
    k: u32,
) -> [[f64; 2]; 2] {
    let j = shift_jacobian(&ode_jacobian(params, eq), diff, k);
    [[j.d11, j.d12], [j.d21, j.d22]]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralMode {
    pub k: u32,
    pub wavenumber: f64,
    pub tk: f64,
    pub dk: f64,
    /// Larger real part first.
    pub eigenvalues: [Complex64; 2],
    pub unstable: bool,
}

impl SpectralMode {
    pub fn from_jacobian(j0: &OdeJacobian, diff: &DiffusionParams, k: u32) -> Self {
        let jk = shift_jacobian(j0, diff, k);
        let (tk, dk) = (jk.trace(), jk.b0());
        let eigenvalues = quadratic_eigenvalues(tk, dk);
        Self {
            k,
            wavenumber: k as f64 / diff.ell,
            tk,
            dk,
            eigenvalues,
            unstable: eigenvalues[0].re > 0.0,
        }
    }

    pub fn growth_rate(&self) -> f64 {
        self.eigenvalues[0].re
    }
}

pub fn dispersion_scan(
    params: &ModelParams,
    diff: &DiffusionParams,
    eq: &Equilibrium,
    k_max: u32,
) -> Vec<SpectralMode> {
    let j0 = ode_jacobian(params, eq);
    (0..=k_max)
        .map(|k| SpectralMode::from_jacobian(&j0, diff, k))
        .collect()
}

/// Critical ratios of `gamma = r2 / r1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaBounds {
    pub minus: f64,
    pub bar: f64,
    pub plus: f64,
}

fn check_sign_pattern(j: &OdeJacobian) -> Result<()> {
    if j.d11 < 0.0 && j.d12 < 0.0 && j.d21 > 0.0 && j.d22 > 0.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "Jacobian sign pattern (-,-,+,+) violated: {j:?}"
        )))
    }
}

pub fn gamma_bounds_of(j: &OdeJacobian) -> Result<GammaBounds> {
    check_sign_pattern(j)?;
    let (d1, d2, d3, d4) = (j.d11, j.d12, j.d21, j.d22);
    let det = d1 * d4 - d2 * d3;
    if det <= 0.0 {
        return Err(Error::Precondition(format!(
            "determinant {det} is not positive"
        )));
    }
    let root = 2.0 * (-d3 * d2 * det).sqrt();
    let base = d1 * d4 - 2.0 * d3 * d2;
    // The small root via the product of roots, `delta4^2 / delta1^2`;
    // `base - root` cancels badly when delta4 is small.
    Ok(GammaBounds {
        minus: d4 * d4 / (base + root),
        bar: -d4 / d1,
        plus: (base + root) / (d1 * d1),
    })
}

pub fn gamma_bounds(params: &ModelParams, eq: &Equilibrium) -> Result<GammaBounds> {
    gamma_bounds_of(&ode_jacobian(params, eq))
}

/// Threshold `r1^(k)` solving `D_k = 0`.
pub fn turing_r1(j: &OdeJacobian, r2: f64, ell: f64, k: u32) -> f64 {
    let (d1, d2, d3, d4) = (j.d11, j.d12, j.d21, j.d22);
    let kl = (k as f64 / ell).powi(2);
    (d1 * d4 - d2 * d3 - d1 * r2 * kl) / (kl * (d4 - r2 * kl))
}

/// Largest mode with a positive threshold, or `None` when `delta4 ell^2 <= r2`.
pub fn k_bar(j: &OdeJacobian, r2: f64, ell: f64) -> Option<u32> {
    let s2 = j.d22 * ell * ell / r2;
    if s2 <= 1.0 {
        return None;
    }
    let s = s2.sqrt();
    let r = s.round();
    let kb = if (s - r).abs() <= 1e-12 * s { r - 1.0 } else { s.floor() };
    (kb >= 1.0).then_some(kb as u32)
}

/// Real minimiser of `k -> r1^(k)`.
pub fn k_hat(j: &OdeJacobian, r2: f64, ell: f64) -> f64 {
    let (d1, d2, d3, d4) = (j.d11, j.d12, j.d21, j.d22);
    let det = d1 * d4 - d2 * d3;
    // Rationalised so nothing cancels when delta4 is small.
    (det * d4 * ell * ell / (r2 * (det + (-d3 * d2 * det).sqrt()))).sqrt()
}

/// Complementary real root of `D_k = 0` (in `k`) once `r1 = r1^(k1)`.
pub fn k_star(j: &OdeJacobian, r2: f64, ell: f64, k1: u32) -> f64 {
    let (d1, d2, d3, d4) = (j.d11, j.d12, j.d21, j.d22);
    let l2 = ell * ell;
    let k2r = (k1 as f64).powi(2) * r2;
    let first = d1 * d4 * l2 - d1 * k2r - d2 * d3 * l2;
    let second = d1 * d4 * d4 * l2 - d1 * d4 * k2r - d2 * d3 * d4 * l2 + d2 * d3 * k2r;
    (r2 * first * second).sqrt() * ell / (r2 * first)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuringThresholds {
    /// `(k, r1^(k))` for `k = 1..=k_bar`.
    pub table: Vec<(u32, f64)>,
    pub k_bar: u32,
    pub k_hat: f64,
    pub k_breve: u32,
    pub gamma: GammaBounds,
    /// `delta4 ell^2 <= r2`: no mode can destabilise.
    pub stable_regime: bool,
    /// Two modes share the minimal threshold.
    pub multi_minimum: bool,
    /// All thresholds in the table are pairwise distinct.
    pub distinct: bool,
}

impl TuringThresholds {
    pub fn r1(&self, k: u32) -> Option<f64> {
        self.table.iter().find(|e| e.0 == k).map(|e| e.1)
    }

    pub fn min_threshold(&self) -> Option<f64> {
        self.r1(self.k_breve)
    }
}

pub fn turing_thresholds_of(j: &OdeJacobian, r2: f64, ell: f64) -> Result<TuringThresholds> {
    let gamma = gamma_bounds_of(j)?;
    let Some(kb) = k_bar(j, r2, ell) else {
        return Ok(TuringThresholds {
            table: Vec::new(),
            k_bar: 0,
            k_hat: f64::NAN,
            k_breve: 0,
            gamma,
            stable_regime: true,
            multi_minimum: false,
            distinct: true,
        });
    };
    let table: Vec<(u32, f64)> = (1..=kb).map(|k| (k, turing_r1(j, r2, ell, k))).collect();
    let mut best = table[0];
    let mut multi = false;
    for &(k, r) in &table[1..] {
        if (r - best.1).abs() <= THRESHOLD_TIE_TOL * best.1.abs() {
            multi = true;
        } else if r < best.1 {
            best = (k, r);
            multi = false;
        }
    }
    let mut distinct = true;
    for (i, a) in table.iter().enumerate() {
        for b in &table[i + 1..] {
            if (a.1 - b.1).abs() <= THRESHOLD_TIE_TOL * a.1.abs().max(b.1.abs()) {
                distinct = false;
            }
        }
    }
    Ok(TuringThresholds {
        table,
        k_bar: kb,
        k_hat: k_hat(j, r2, ell),
        k_breve: best.0,
        gamma,
        stable_regime: false,
        multi_minimum: multi,
        distinct,
    })
}

/// Threshold table at `eq`; only `r2` and `ell` of `diff` are used.
pub fn turing_thresholds(
    params: &ModelParams,
    diff: &DiffusionParams,
    eq: &Equilibrium,
) -> Result<TuringThresholds> {
    turing_thresholds_of(&ode_jacobian(params, eq), diff.r2, diff.ell)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StableCase {
    /// `gamma >= gamma_-`.
    A,
    /// `delta4 ell^2 <= r2`.
    B,
    /// `r1 < r1^(k_breve)`.
    C,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TuringClass {
    Stable(StableCase),
    TuringUnstable {
        unstable_modes: Vec<u32>,
        /// Modes whose threshold lies within `1e-4` (relative) of `r1`.
        near_threshold: Vec<u32>,
    },
    OnTuringThreshold(u32),
}

/// Classifies an ODE-stable `E2` under diffusion.
pub fn classify_with_diffusion(
    params: &ModelParams,
    diff: &DiffusionParams,
    eq: &Equilibrium,
) -> Result<TuringClass> {
    let j0 = ode_jacobian(params, eq);
    if j0.trace() >= 0.0 || j0.b0() <= 0.0 {
        return Err(Error::Precondition(
            "steady state is not stable for the kinetics".into(),
        ));
    }
    let th = turing_thresholds_of(&j0, diff.r2, diff.ell)?;
    if diff.r1 == 0.0 || diff.r2 / diff.r1 >= th.gamma.minus {
        return Ok(TuringClass::Stable(StableCase::A));
    }
    if th.stable_regime {
        return Ok(TuringClass::Stable(StableCase::B));
    }
    if th.distinct {
        if let Some(&(k, _)) = th
            .table
            .iter()
            .find(|(_, r)| (diff.r1 - r).abs() <= ON_THRESHOLD_TOL * r)
        {
            return Ok(TuringClass::OnTuringThreshold(k));
        }
    }
    let min = th.min_threshold().expect("non-empty table");
    if diff.r1 < min {
        return Ok(TuringClass::Stable(StableCase::C));
    }
    let unstable_modes = th
        .table
        .iter()
        .filter(|&&(k, _)| SpectralMode::from_jacobian(&j0, diff, k).dk < 0.0)
        .map(|e| e.0)
        .collect();
    let near_threshold = th
        .table
        .iter()
        .filter(|(_, r)| (diff.r1 - r).abs() <= 1e-4 * r)
        .map(|e| e.0)
        .collect();
    Ok(TuringClass::TuringUnstable {
        unstable_modes,
        near_threshold,
    })
}

/// Log-spaced `beta` scan settings for mode thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaScan {
    /// Upper end as a multiple of the lower end.
    pub span: f64,
    pub samples: usize,
}

impl Default for BetaScan {
    fn default() -> Self {
        Self {
            span: 1e3,
            samples: 400,
        }
    }
}

impl BetaScan {
    /// Grid starting just above the smallest `beta` at which `E2` exists.
    pub fn grid(&self, params: &ModelParams) -> Vec<f64> {
        let lo = endemic_beta_floor(params, params.b) * (1.0 + 1e-9);
        roots::geomspace(lo, lo * self.span, self.samples)
    }
}

fn e2_jacobian(params: &ModelParams, beta: f64) -> Option<OdeJacobian> {
    let p = params.with_beta(beta);
    require_endemic_high(&p).ok().map(|e| ode_jacobian(&p, &e))
}

/// `T_k` as a function of `beta`; NaN where `E2` is absent.
pub fn mode_trace(params: &ModelParams, diff: &DiffusionParams, k: u32, beta: f64) -> f64 {
    e2_jacobian(params, beta).map_or(f64::NAN, |j| j.trace() - (diff.r1 + diff.r2) * diff.q2(k))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeHopf {
    pub k: u32,
    pub beta: f64,
    pub dk: f64,
    /// `dT_k / dbeta` by central differences.
    pub trace_slope: f64,
    pub omega: f64,
    /// `(j, T_j)` at the threshold for `j = 0..=k_max`, `j != k`.
    pub other_traces: Vec<(u32, f64)>,
}

/// Smallest `beta` where mode `k` has a Hopf pair (`T_k = 0`, `D_k > 0`).
pub fn hopf_mode_threshold(
    params: &ModelParams,
    diff: &DiffusionParams,
    k: u32,
    scan: BetaScan,
) -> Result<ModeHopf> {
    let grid = scan.grid(params);
    let found = roots::all_roots(|beta| mode_trace(params, diff, k, beta), &grid);
    if found.is_empty() {
        return Err(Error::NotFound(format!(
            "T_{k} has no sign change for beta in [{}, {}]",
            grid[0],
            grid[grid.len() - 1]
        )));
    }
    let mut rejected = Vec::new();
    for beta in found {
        let j0 = e2_jacobian(params, beta).expect("root lies where E2 exists");
        let mode = SpectralMode::from_jacobian(&j0, diff, k);
        if mode.dk <= 0.0 {
            rejected.push(format!("beta = {beta}: D_{k} = {}", mode.dk));
            continue;
        }
        let h = 1e-6 * beta;
        let slope = (mode_trace(params, diff, k, beta + h) - mode_trace(params, diff, k, beta - h))
            / (2.0 * h);
        if slope == 0.0 || !slope.is_finite() {
            rejected.push(format!("beta = {beta}: T_{k}' = {slope}"));
            continue;
        }
        let k_max = 50.max(2 * k);
        let other_traces = (0..=k_max)
            .filter(|&j| j != k)
            .map(|j| (j, SpectralMode::from_jacobian(&j0, diff, j).tk))
            .collect();
        return Ok(ModeHopf {
            k,
            beta,
            dk: mode.dk,
            trace_slope: slope,
            omega: mode.dk.sqrt(),
            other_traces,
        });
    }
    Err(Error::Rejected(rejected.join("; ")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HClause {
    H1,
    H2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuringHopfPoint {
    pub k1: u32,
    pub k2: u32,
    pub r1: f64,
    pub beta: f64,
    pub k_star: f64,
    pub k_bar: u32,
    pub k_breve: u32,
    pub clause: HClause,
    /// `k_breve == floor(k_star)`, where both clauses touch.
    pub boundary: bool,
    pub d_k1: f64,
    pub d_k2: f64,
    pub t_k2: f64,
}

/// Checks condition (H) and returns the clause that holds.
pub fn condition_h(k1: u32, k2: u32, k_breve: u32, k_star: f64) -> Result<(HClause, bool)> {
    let kf = k_star.floor();
    if !kf.is_finite() || kf < 0.0 {
        return Err(Error::Rejected(format!("k* = {k_star} is not a usable bound")));
    }
    let kf = kf as u32;
    let boundary = k_breve == kf;
    if k2 < k1 && k1 <= k_breve && k_breve <= kf {
        Ok((HClause::H1, boundary))
    } else if k2 <= kf && kf <= k_breve && k_breve <= k1 {
        Ok((HClause::H2, boundary))
    } else {
        Err(Error::Rejected(format!(
            "condition H fails: H1 needs k2 < k1 <= k_breve <= floor(k*), \
             H2 needs k2 <= floor(k*) <= k_breve <= k1; \
             got k1 = {k1}, k2 = {k2}, k_breve = {k_breve}, floor(k*) = {kf}"
        )))
    }
}

/// `(k1, k2)` Turing–Hopf point: `r1 = r1^(k1)(beta)` and `T_k2 = 0`.
pub fn turing_hopf_detect(
    params: &ModelParams,
    diff: &DiffusionParams,
    k1: u32,
    k2: u32,
    scan: BetaScan,
) -> Result<TuringHopfPoint> {
    if k1 == 0 || k2 >= k1 {
        return Err(Error::Rejected(format!(
            "need 0 <= k2 < k1 with k1 >= 1, got (k1, k2) = ({k1}, {k2})"
        )));
    }
    let r1_at = |beta: f64| -> Option<(OdeJacobian, f64)> {
        let j = e2_jacobian(params, beta)?;
        let kb = k_bar(&j, diff.r2, diff.ell)?;
        (k1 <= kb).then(|| (j, turing_r1(&j, diff.r2, diff.ell, k1)))
    };
    let g = |beta: f64| {
        r1_at(beta).map_or(f64::NAN, |(j, r1)| {
            j.trace() - (r1 + diff.r2) * diff.q2(k2)
        })
    };
    let grid = scan.grid(params);
    let found = roots::all_roots(g, &grid);
    if found.is_empty() {
        return Err(Error::NotFound(format!(
            "no beta with r1 = r1^({k1}) and T_{k2} = 0"
        )));
    }
    let mut reasons = Vec::new();
    for beta in found {
        let (j, r1) = r1_at(beta).expect("root lies where the threshold exists");
        let th = turing_thresholds_of(&j, diff.r2, diff.ell)?;
        let ks = k_star(&j, diff.r2, diff.ell, k1);
        let d = diff.with_r1(r1);
        let m1 = SpectralMode::from_jacobian(&j, &d, k1);
        let m2 = SpectralMode::from_jacobian(&j, &d, k2);
        if m2.dk <= 0.0 {
            reasons.push(format!("beta = {beta}: D_{k2} = {} <= 0", m2.dk));
            continue;
        }
        match condition_h(k1, k2, th.k_breve, ks) {
            Ok((clause, boundary)) => {
                return Ok(TuringHopfPoint {
                    k1,
                    k2,
                    r1,
                    beta,
                    k_star: ks,
                    k_bar: th.k_bar,
                    k_breve: th.k_breve,
                    clause,
                    boundary,
                    d_k1: m1.dk,
                    d_k2: m2.dk,
                    t_k2: m2.tk,
                })
            }
            Err(e) => reasons.push(format!("beta = {beta}: {e}")),
        }
    }
    Err(Error::Rejected(reasons.join("; ")))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuringTuringPoint {
    pub i: u32,
    pub j: u32,
    pub r1: f64,
    pub r2: f64,
}

/// Crossings `r1^(i)(r2) = r1^(j)(r2)` at fixed kinetics, over `r2` in range.
pub fn turing_turing_points(
    j0: &OdeJacobian,
    ell: f64,
    r2_range: (f64, f64),
    samples: usize,
) -> Vec<TuringTuringPoint> {
    let k_top = k_bar(j0, r2_range.0, ell).unwrap_or(0);
    let grid = roots::geomspace(r2_range.0, r2_range.1, samples.max(16));
    let mut out = Vec::new();
    for i in 1..=k_top {
        for jm in i + 1..=k_top {
            let diff = |r2: f64| {
                let kb = k_bar(j0, r2, ell).unwrap_or(0);
                if jm > kb {
                    return f64::NAN;
                }
                turing_r1(j0, r2, ell, i) - turing_r1(j0, r2, ell, jm)
            };
            for r2 in roots::all_roots(diff, &grid) {
                out.push(TuringTuringPoint {
                    i,
                    j: jm,
                    r1: turing_r1(j0, r2, ell, i),
                    r2,
                });
            }
        }
    }
    out.sort_by(|a, b| a.r2.total_cmp(&b.r2).then(a.i.cmp(&b.i)));
    out
}
