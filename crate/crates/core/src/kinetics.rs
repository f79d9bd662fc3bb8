//! Reaction kinetics of the spatially homogeneous system
//!
//! ```text
//! dS/dt = A - d S - beta S I
//! dI/dt = beta S I - d I - h(I) I,    h(I) = mu0 + (mu1 - mu0) b / (I + b)
//! ```
//!
//! together with its constant steady states and their linear stability.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots;

/// Roots of the endemic quadratic closer than this (scaled by `1 + I`) merge.
pub const ROOT_MERGE_TOL: f64 = 1e-8;
/// Relative width of the `Delta == 0` band.
pub const DISCRIMINANT_TOL: f64 = 1e-12;
/// `|B1(I2)| <= MARGINAL_HOPF_TOL * (d + beta I2)` counts as a Hopf point.
pub const MARGINAL_HOPF_TOL: f64 = 1e-9;

/// The six epidemiological constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Recruitment rate `A`.
    pub a: f64,
    /// Natural death rate.
    pub d: f64,
    /// Transmission rate.
    pub beta: f64,
    /// Minimum per-capita recovery rate.
    pub mu0: f64,
    /// Maximum per-capita recovery rate.
    pub mu1: f64,
    /// Health-resource availability.
    pub b: f64,
}

impl ModelParams {
    pub fn new(a: f64, d: f64, beta: f64, mu0: f64, mu1: f64, b: f64) -> Result<Self> {
        let p = Self {
            a,
            d,
            beta,
            mu0,
            mu1,
            b,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("A", self.a),
            ("d", self.d),
            ("beta", self.beta),
            ("mu0", self.mu0),
            ("mu1", self.mu1),
            ("b", self.b),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and strictly positive",
                });
            }
        }
        if self.mu1 < self.mu0 {
            return Err(Error::InvalidParameter {
                name: "mu1",
                value: self.mu1,
                reason: "must be at least mu0",
            });
        }
        Ok(())
    }

    pub fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }

    pub fn with_b(self, b: f64) -> Self {
        Self { b, ..self }
    }

    /// `h(I)`, erroring on negative infected levels.
    pub fn recovery_rate(&self, i: f64) -> Result<f64> {
        if i < 0.0 || i.is_nan() {
            return Err(Error::Domain(format!(
                "recovery rate needs I >= 0, got {i}"
            )));
        }
        Ok(self.h(i))
    }

    #[inline]
    pub fn h(&self, i: f64) -> f64 {
        self.mu0 + (self.mu1 - self.mu0) * self.b / (i + self.b)
    }

    #[inline]
    pub fn h_prime(&self, i: f64) -> f64 {
        let w = i + self.b;
        -(self.mu1 - self.mu0) * self.b / (w * w)
    }

    pub fn basic_reproduction_number(&self) -> f64 {
        self.beta * self.a / (self.d * (self.d + self.mu1))
    }

    /// Right-hand side of the kinetics at `(S, I)`.
    #[inline]
    pub fn reaction(&self, s: f64, i: f64) -> (f64, f64) {
        let infection = self.beta * s * i;
        (
            self.a - self.d * s - infection,
            infection - self.d * i - self.h(i) * i,
        )
    }

    /// Upper bound `A/d` of `S + I` on the invariant region.
    pub fn carrying_total(&self) -> f64 {
        self.a / self.d
    }

    /// Susceptible level on the nullcline `dI/dt = 0`, `I > 0`.
    pub fn endemic_susceptible(&self, i: f64) -> f64 {
        (self.h(i) + self.d) / self.beta
    }

    pub fn endemic_quadratic(&self) -> QuadraticCoeffs {
        let ModelParams {
            a,
            d,
            beta,
            mu0,
            mu1,
            b,
        } = *self;
        let r0 = self.basic_reproduction_number();
        let a2 = (d + mu0) * beta;
        let a1 = d * d + (b * beta + mu0) * d + (b * mu1 - a) * beta;
        let a0 = b * d * (d + mu1) * (1.0 - r0);
        let delta = (d + mu1).powi(2) * beta * beta * b * b
            + 2.0 * a * (d + 2.0 * mu0 - mu1) * beta * beta * b
            - 2.0 * d * (d + mu1) * (d + mu0) * beta * b
            + a * a * beta * beta
            - 2.0 * d * (d + mu0) * a * beta
            + d * d * (d + mu0).powi(2);
        QuadraticCoeffs { a2, a1, a0, delta }
    }

    /// `B1(I) = d + beta I + h'(I) I`, minus the trace of the Jacobian on the
    /// endemic nullcline.
    pub fn b1(&self, i: f64) -> f64 {
        self.d + self.beta * i + self.h_prime(i) * i
    }

    /// `B0(I)`, the Jacobian determinant on the endemic nullcline.
    pub fn b0(&self, i: f64) -> f64 {
        (self.d + self.beta * i) * self.h_prime(i) * i
            + self.beta * (self.h(i) + self.d) * i
    }

    /// Cubic `Psi` with `B1(I) = Psi(I) / (I + b)^2`.
    pub fn psi(&self, i: f64) -> f64 {
        let [c3, c2, c1, c0] = self.psi_coeffs();
        ((c3 * i + c2) * i + c1) * i + c0
    }

    pub fn psi_prime(&self, i: f64) -> f64 {
        let [c3, c2, c1, _] = self.psi_coeffs();
        (3.0 * c3 * i + 2.0 * c2) * i + c1
    }

    fn psi_coeffs(&self) -> [f64; 4] {
        let ModelParams {
            d,
            beta,
            mu0,
            mu1,
            b,
            ..
        } = *self;
        [
            beta,
            2.0 * b * beta + d,
            b * b * beta + 2.0 * b * d - b * mu1 + b * mu0,
            b * b * d,
        ]
    }
}

/// Coefficients of `f(I) = A2 I^2 + A1 I + A0` whose positive roots are the
/// endemic infected levels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCoeffs {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
    pub delta: f64,
}

impl QuadraticCoeffs {
    pub fn eval(&self, i: f64) -> f64 {
        (self.a2 * i + self.a1) * i + self.a0
    }

    pub fn derivative(&self, i: f64) -> f64 {
        2.0 * self.a2 * i + self.a1
    }

    fn discriminant_band(&self) -> f64 {
        DISCRIMINANT_TOL * (self.a1 * self.a1).max(4.0 * (self.a2 * self.a0).abs())
    }

    /// Both real roots, ascending, via the cancellation-free form.
    pub fn real_roots(&self) -> Option<(f64, f64)> {
        if self.delta < -self.discriminant_band() {
            return None;
        }
        let sqrt_delta = self.delta.max(0.0).sqrt();
        let sign = if self.a1 >= 0.0 { 1.0 } else { -1.0 };
        let q = -0.5 * (self.a1 + sign * sqrt_delta);
        if q == 0.0 {
            return Some((0.0, 0.0));
        }
        let (r1, r2) = (q / self.a2, self.a0 / q);
        Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    /// `E0 = (A/d, 0)`.
    DiseaseFree,
    /// `E1`, the lower endemic branch (a saddle).
    EndemicLow,
    /// `E2`, the upper endemic branch.
    EndemicHigh,
    /// `E*`, where `E1` and `E2` coalesce.
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub s: f64,
    pub i: f64,
    pub kind: EquilibriumKind,
}

impl Equilibrium {
    pub fn disease_free(params: &ModelParams) -> Self {
        Self {
            s: params.a / params.d,
            i: 0.0,
            kind: EquilibriumKind::DiseaseFree,
        }
    }

    fn endemic(params: &ModelParams, i: f64, kind: EquilibriumKind) -> Self {
        Self {
            s: params.endemic_susceptible(i),
            i,
            kind,
        }
    }

    pub fn is_endemic(&self) -> bool {
        self.kind != EquilibriumKind::DiseaseFree
    }
}

/// Which clause of the existence theorem applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExistenceCase {
    /// `R0 > 1`: unique `E2`.
    Supercritical,
    /// `R0 = 1`, `A1 < 0`: unique `E2`.
    Threshold,
    /// `R0 < 1`, `Delta > 0`, `A1 < 0`: `E1` and `E2`.
    Backward,
    /// `R0 < 1`, `Delta = 0`, `A1 < 0`: `E*`.
    Coalesced,
    /// No endemic equilibrium.
    None,
}

pub fn existence_case(params: &ModelParams) -> ExistenceCase {
    classify_existence(params, &params.endemic_quadratic()).0
}

fn classify_existence(
    params: &ModelParams,
    quad: &QuadraticCoeffs,
) -> (ExistenceCase, Vec<Equilibrium>) {
    use EquilibriumKind::*;
    let r0 = params.basic_reproduction_number();
    if r0 > 1.0 {
        let (lo, hi) = quad
            .real_roots()
            .expect("A0 < 0 gives a positive discriminant");
        let i2 = if hi > 0.0 { hi } else { lo };
        return (
            ExistenceCase::Supercritical,
            vec![Equilibrium::endemic(params, i2, EndemicHigh)],
        );
    }
    if quad.a1 >= 0.0 {
        return (ExistenceCase::None, Vec::new());
    }
    if r0 == 1.0 {
        let i2 = -quad.a1 / quad.a2;
        return (
            ExistenceCase::Threshold,
            vec![Equilibrium::endemic(params, i2, EndemicHigh)],
        );
    }
    let band = quad.discriminant_band();
    if quad.delta < -band {
        return (ExistenceCase::None, Vec::new());
    }
    let double_root = -quad.a1 / (2.0 * quad.a2);
    if quad.delta.abs() <= band {
        return (
            ExistenceCase::Coalesced,
            vec![Equilibrium::endemic(params, double_root, Degenerate)],
        );
    }
    let (i1, i2) = quad.real_roots().expect("delta above the band");
    if i2 - i1 < ROOT_MERGE_TOL * (1.0 + i2.abs()) {
        return (
            ExistenceCase::Coalesced,
            vec![Equilibrium::endemic(params, double_root, Degenerate)],
        );
    }
    (
        ExistenceCase::Backward,
        vec![
            Equilibrium::endemic(params, i1, EndemicLow),
            Equilibrium::endemic(params, i2, EndemicHigh),
        ],
    )
}

/// All constant steady states, `E0` first then endemic ones by increasing `I`.
pub fn find_equilibria(params: &ModelParams) -> Vec<Equilibrium> {
    let mut out = vec![Equilibrium::disease_free(params)];
    out.extend(classify_existence(params, &params.endemic_quadratic()).1);
    out
}

/// `E2` if it exists.
pub fn endemic_high(params: &ModelParams) -> Option<Equilibrium> {
    find_equilibria(params)
        .into_iter()
        .find(|e| e.kind == EquilibriumKind::EndemicHigh)
}

pub fn require_endemic_high(params: &ModelParams) -> Result<Equilibrium> {
    endemic_high(params).ok_or_else(|| {
        Error::Precondition(format!(
            "no endemic equilibrium E2 for beta = {}, b = {}",
            params.beta, params.b
        ))
    })
}

/// Jacobian of the kinetics, entries named as in `[[d11, d12], [d21, d22]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeJacobian {
    pub d11: f64,
    pub d12: f64,
    pub d21: f64,
    pub d22: f64,
}

impl OdeJacobian {
    pub fn trace(&self) -> f64 {
        self.d11 + self.d22
    }

    /// `B1 = -trace`.
    pub fn b1(&self) -> f64 {
        -self.trace()
    }

    /// `B0 = det`.
    pub fn b0(&self) -> f64 {
        self.d11 * self.d22 - self.d12 * self.d21
    }

    pub fn eigenvalues(&self) -> [Complex64; 2] {
        quadratic_eigenvalues(self.trace(), self.b0())
    }
}

/// Roots of `lambda^2 - trace lambda + det = 0`, larger real part first.
pub fn quadratic_eigenvalues(trace: f64, det: f64) -> [Complex64; 2] {
    let disc = trace * trace - 4.0 * det;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        // cancellation-free pair
        let q = 0.5 * (trace + sq.copysign(trace));
        let (x1, x2) = if q == 0.0 { (0.0, 0.0) } else { (q, det / q) };
        let (hi, lo) = if x1 >= x2 { (x1, x2) } else { (x2, x1) };
        [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [
            Complex64::new(0.5 * trace, im),
            Complex64::new(0.5 * trace, -im),
        ]
    }
}

/// Jacobian of the kinetics at an arbitrary state.
pub fn jacobian_at(params: &ModelParams, s: f64, i: f64) -> OdeJacobian {
    let ModelParams { d, beta, .. } = *params;
    OdeJacobian {
        d11: -(d + beta * i),
        d12: -beta * s,
        d21: beta * i,
        d22: beta * s - d - params.h(i) - params.h_prime(i) * i,
    }
}

/// Jacobian `J0` at a steady state.
///
/// Endemic states use the nullcline-reduced entries, so `d12 = -(h + d)` and
/// `d22 = -h'(I) I` hold exactly.
pub fn ode_jacobian(params: &ModelParams, eq: &Equilibrium) -> OdeJacobian {
    if !eq.is_endemic() {
        return jacobian_at(params, eq.s, eq.i);
    }
    let ModelParams { d, beta, .. } = *params;
    let i = eq.i;
    OdeJacobian {
        d11: -(d + beta * i),
        d12: -(params.h(i) + d),
        d21: beta * i,
        d22: -params.h_prime(i) * i,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PsiCase {
    AlwaysPositive,
    /// `Psi` touches zero at a single positive double root.
    DoubleRoot(f64),
    /// `Psi < 0` strictly between the two positive roots.
    TwoRoots { low: f64, high: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiClassification {
    pub omega: f64,
    pub omega_bar: f64,
    pub case: PsiCase,
}

/// Threshold `omega` for `mu1 - mu0` above which `Psi` dips below zero.
pub fn psi_threshold(params: &ModelParams) -> f64 {
    let ModelParams { d, beta, b, .. } = *params;
    let bb = b * beta;
    (8.0 * bb * bb + 20.0 * bb * d - d * d + (d * (8.0 * bb + d).powi(3)).sqrt()) / (8.0 * bb)
}

/// Sign structure of `Psi` on `I > 0`.
pub fn classify_psi(params: &ModelParams) -> PsiClassification {
    let ModelParams {
        d,
        beta,
        mu0,
        mu1,
        b,
        ..
    } = *params;
    let omega = psi_threshold(params);
    let omega_bar = mu1 - mu0;
    let result = |case| PsiClassification {
        omega,
        omega_bar,
        case,
    };
    if omega_bar <= b * beta + 2.0 * d || omega_bar < omega {
        return result(PsiCase::AlwaysPositive);
    }
    // Positive critical point of Psi (the local minimum).
    let [c3, c2, c1, c0] = params.psi_coeffs();
    let disc = (c2 * c2 - 3.0 * c3 * c1).max(0.0);
    let i_min = (-c2 + disc.sqrt()) / (3.0 * c3);
    let psi_min = params.psi(i_min);
    let scale = c0.max(c3 * i_min.powi(3)).max(f64::MIN_POSITIVE);
    if psi_min >= 0.0 || omega_bar == omega || psi_min.abs() <= 1e-12 * scale {
        return result(PsiCase::DoubleRoot(i_min));
    }
    let upper = 1.0 + (c2 + c1.abs() + c0) / c3;
    let psi = |i: f64| params.psi(i);
    let low = roots::brent(psi, 0.0, i_min).unwrap_or(i_min);
    let high = roots::brent(psi, i_min, upper.max(2.0 * i_min)).unwrap_or(i_min);
    result(PsiCase::TwoRoots { low, high })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum E2Stability {
    Stable,
    Unstable,
    MarginalHopf,
}

pub fn stability_e2(params: &ModelParams) -> Result<E2Stability> {
    let e2 = require_endemic_high(params)?;
    let i2 = e2.i;
    if params.b1(i2).abs() <= MARGINAL_HOPF_TOL * (params.d + params.beta * i2) {
        return Ok(E2Stability::MarginalHopf);
    }
    Ok(match classify_psi(params).case {
        PsiCase::TwoRoots { low, high } if low < i2 && i2 < high => E2Stability::Unstable,
        _ => E2Stability::Stable,
    })
}
