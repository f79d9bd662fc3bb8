//! Threshold curves and Hopf structure of the kinetics in the `(b, beta)` plane.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{
    require_endemic_high, Equilibrium, ModelParams, MARGINAL_HOPF_TOL,
};
use crate::roots;

/// `R0 = 1`: `beta = d (d + mu1) / A`, independent of `b`.
pub fn curve_c0(params: &ModelParams) -> f64 {
    params.d * (params.d + params.mu1) / params.a
}

/// `A1 = 0`, defined for `0 <= b < A / (d + mu1)`.
pub fn curve_c1(params: &ModelParams, b: f64) -> Result<f64> {
    let pole = params.a / (params.d + params.mu1);
    if !(0.0..pole).contains(&b) {
        return Err(Error::Domain(format!(
            "C1 needs 0 <= b < A/(d+mu1) = {pole}, got {b}"
        )));
    }
    Ok(params.d * (params.d + params.mu0) / (params.a - b * (params.d + params.mu1)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// `Delta = 0` solved for `beta`.
pub fn curve_cdelta(params: &ModelParams, b: f64, branch: Branch) -> f64 {
    let ModelParams {
        a, d, mu0, mu1, ..
    } = *params;
    let b = b.max(0.0);
    let base = d * (d + mu0) * (b * d + b * mu1 + a);
    let root = 2.0 * (d + mu0) * d * ((mu1 - mu0) * a * b).sqrt();
    let den = a * a + 2.0 * b * (2.0 * mu0 + d - mu1) * a + b * b * (d + mu1).powi(2);
    match branch {
        Branch::Plus => (base + root) / den,
        Branch::Minus => (base - root) / den,
    }
}

/// `b~ = A (mu1 - mu0) / (d + mu1)^2`, abscissa of `P0`.
pub fn b_tilde(params: &ModelParams) -> f64 {
    params.a * (params.mu1 - params.mu0) / (params.d + params.mu1).powi(2)
}

/// Smallest `beta` at which `E2` exists for the given `b`.
pub fn endemic_beta_floor(params: &ModelParams, b: f64) -> f64 {
    if b < b_tilde(params) {
        curve_cdelta(params, b, Branch::Plus)
    } else {
        curve_c0(params)
    }
}

/// The three named corners of the existence diagram.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorPoints {
    pub p0: (f64, f64),
    pub p1: (f64, f64),
    pub p2: (f64, f64),
    pub b_tilde: f64,
}

pub fn anchor_points(params: &ModelParams) -> AnchorPoints {
    let phi0 = curve_c0(params);
    let bt = b_tilde(params);
    AnchorPoints {
        p0: (bt, phi0),
        p1: (0.0, phi0),
        p2: (0.0, params.d * (params.d + params.mu0) / params.a),
        b_tilde: bt,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    V0,
    V1,
    V2,
    OnC0,
    OnCDeltaPlus,
}

impl Region {
    /// Number of simple endemic equilibria in the open region.
    pub fn endemic_count(self) -> Option<usize> {
        match self {
            Region::V0 => Some(0),
            Region::V1 => Some(1),
            Region::V2 => Some(2),
            _ => None,
        }
    }
}

const CURVE_BAND: f64 = 1e-12;

pub fn classify_region(params: &ModelParams, b: f64, beta: f64) -> Region {
    let phi0 = curve_c0(params);
    if (beta - phi0).abs() <= CURVE_BAND * phi0 {
        return Region::OnC0;
    }
    if beta > phi0 {
        return Region::V1;
    }
    if b >= b_tilde(params) {
        return Region::V0;
    }
    let plus = curve_cdelta(params, b, Branch::Plus);
    if (beta - plus).abs() <= CURVE_BAND * plus {
        Region::OnCDeltaPlus
    } else if beta > plus {
        Region::V2
    } else {
        Region::V0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveTag {
    C0,
    C1,
    CDeltaPlus,
    CDeltaMinus,
    Hopf,
}

impl CurveTag {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveTag::C0 => "C0",
            CurveTag::C1 => "C1",
            CurveTag::CDeltaPlus => "CDelta+",
            CurveTag::CDeltaMinus => "CDelta-",
            CurveTag::Hopf => "H",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifCurvePoint {
    pub b: f64,
    pub beta: f64,
    pub curve: CurveTag,
}

/// Samples the algebraic threshold curves on `b` values; `C1` stops at its pole.
pub fn threshold_curves(params: &ModelParams, bs: &[f64]) -> Vec<BifCurvePoint> {
    let mut out = Vec::new();
    let phi0 = curve_c0(params);
    for &b in bs {
        out.push(BifCurvePoint {
            b,
            beta: phi0,
            curve: CurveTag::C0,
        });
    }
    for &b in bs {
        if let Ok(beta) = curve_c1(params, b) {
            out.push(BifCurvePoint {
                b,
                beta,
                curve: CurveTag::C1,
            });
        }
    }
    for (branch, curve) in [
        (Branch::Plus, CurveTag::CDeltaPlus),
        (Branch::Minus, CurveTag::CDeltaMinus),
    ] {
        for &b in bs {
            out.push(BifCurvePoint {
                b,
                beta: curve_cdelta(params, b, branch),
                curve,
            });
        }
    }
    out
}

/// Coefficients of the time-rescaled cubic system around `E2`, in the shifted
/// coordinates `x = S - S2`, `y = I - I2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicSystemCoeffs {
    pub j11: f64,
    pub j12: f64,
    pub j21: f64,
    pub j22: f64,
    pub a11: f64,
    pub a02: f64,
    pub a12: f64,
    pub b11: f64,
    pub b02: f64,
    pub b12: f64,
}

pub fn cubic_coeffs(params: &ModelParams, e2: &Equilibrium) -> CubicSystemCoeffs {
    let ModelParams {
        d, beta, mu0, b, ..
    } = *params;
    let (s2, i2) = (e2.s, e2.i);
    let h = params.h(i2);
    let w = i2 + b;
    CubicSystemCoeffs {
        j11: -(d + beta * i2) * w,
        j12: -(h + d) * w,
        j21: beta * i2 * w,
        j22: -params.h_prime(i2) * i2 * w,
        a11: -(b * beta + 2.0 * beta * i2 + d),
        a02: -(h + d),
        a12: -beta,
        b11: b * beta + 2.0 * beta * i2,
        b02: beta * s2 - d - mu0,
        b12: beta,
    }
}

impl CubicSystemCoeffs {
    /// Nonlinear part `(F, G)` at `(x, y)`.
    pub fn nonlinear(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.a11 * x * y + self.a02 * y * y + self.a12 * x * y * y,
            self.b11 * x * y + self.b02 * y * y + self.b12 * x * y * y,
        )
    }

    fn det(&self) -> f64 {
        self.j11 * self.j22 - self.j12 * self.j21
    }

    /// Symmetric bilinear form of the quadratic terms.
    fn quad(&self, u: [Complex64; 2], v: [Complex64; 2]) -> [Complex64; 2] {
        let cross = u[0] * v[1] + u[1] * v[0];
        let yy = u[1] * v[1] * 2.0;
        [
            cross * self.a11 + yy * self.a02,
            cross * self.b11 + yy * self.b02,
        ]
    }

    /// Symmetric trilinear form of the cubic terms.
    fn cubic(&self, u: [Complex64; 2], v: [Complex64; 2], w: [Complex64; 2]) -> [Complex64; 2] {
        let s = (u[0] * v[1] * w[1] + u[1] * v[0] * w[1] + u[1] * v[1] * w[0]) * 2.0;
        [s * self.a12, s * self.b12]
    }
}

/// First Lyapunov coefficient by the standard projection formula, together
/// with the closed form printed for this model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    /// `Re <p, C(q,q,q̄) - 2B(q, J⁻¹B(q,q̄)) + B(q̄, (2iω-J)⁻¹B(q,q))> / (2ω)`.
    pub standard: f64,
    /// Closed form as printed, reading the undefined `a21` as zero.
    pub printed: f64,
    pub sign_agrees: bool,
}

fn solve2(m: [[Complex64; 2]; 2], r: [Complex64; 2]) -> [Complex64; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        (r[0] * m[1][1] - m[0][1] * r[1]) / det,
        (m[0][0] * r[1] - m[1][0] * r[0]) / det,
    ]
}

fn dot(p: [Complex64; 2], q: [Complex64; 2]) -> Complex64 {
    p[0].conj() * q[0] + p[1].conj() * q[1]
}

/// Standard first Lyapunov coefficient of the cubic system.
pub fn lyapunov_standard(c: &CubicSystemCoeffs) -> Result<f64> {
    let det = c.det();
    let tr = c.j11 + c.j22;
    let omega2 = det - 0.25 * tr * tr;
    if !(det > 0.0 && omega2 > 0.0) {
        return Err(Error::Precondition(format!(
            "linear part has no complex pair (det = {det})"
        )));
    }
    let omega = omega2.sqrt();
    let lambda = Complex64::new(0.5 * tr, omega);
    let re = |x: f64| Complex64::new(x, 0.0);
    let q = [re(c.j12), lambda - c.j11];
    let qn = (q[0].norm_sqr() + q[1].norm_sqr()).sqrt();
    let q = [q[0] / qn, q[1] / qn];
    let p0 = [re(c.j21), lambda.conj() - c.j11];
    let norm = dot(p0, q).conj();
    let p = [p0[0] / norm, p0[1] / norm];
    let qb = [q[0].conj(), q[1].conj()];
    let jac = [[re(c.j11), re(c.j12)], [re(c.j21), re(c.j22)]];
    let a_inv_bqqb = solve2(jac, c.quad(q, qb));
    let two_iw = Complex64::new(0.0, 2.0 * omega);
    let shifted = [
        [two_iw - c.j11, re(-c.j12)],
        [re(-c.j21), two_iw - c.j22],
    ];
    let res_bqq = solve2(shifted, c.quad(q, q));
    let g = dot(p, c.cubic(q, q, qb)) - dot(p, c.quad(q, a_inv_bqqb)) * 2.0
        + dot(p, c.quad(qb, res_bqq));
    Ok(g.re / (2.0 * omega))
}

/// The closed form as printed, including its `j12 j12` product; the
/// undefined `a21` enters as zero.
pub fn lyapunov_printed(c: &CubicSystemCoeffs) -> Result<f64> {
    let det = c.det();
    if det <= 0.0 {
        return Err(Error::Precondition(format!(
            "linear part determinant {det} is not positive"
        )));
    }
    let CubicSystemCoeffs {
        j11,
        j12,
        j21,
        a11,
        a02,
        b11,
        b02,
        b12,
        ..
    } = *c;
    let a21 = 0.0;
    let pi3 = 3.0 * std::f64::consts::PI;
    let den = 2.0 * j12 * det.powf(1.5);
    let first = -pi3
        * (j11 * j21 * (a11 * a11 + a11 * b02 + a02 * b11 - 2.0 * b02 * b02)
            + j11 * j12 * (b11 * b11 + a11 * b02)
            + j12 * j21 * b11 * b02)
        / den;
    let second = pi3
        * (j21 * j21 * (a11 * a02 + 2.0 * a02 * b02)
            - 2.0 * j11 * j11 * b11 * b02
            - (j11 * j11 + j12 * j12) * (2.0 * j11 * b12 + j21 * a21))
        / den;
    Ok(first - second)
}

/// First Lyapunov coefficient at `E2`, which must sit on the Hopf curve.
pub fn first_lyapunov(params: &ModelParams, e2: &Equilibrium) -> Result<LyapunovReport> {
    let b1 = params.b1(e2.i);
    let scale = params.d + params.beta * e2.i;
    if b1.abs() > MARGINAL_HOPF_TOL * scale {
        return Err(Error::Precondition(format!(
            "B1(I2) = {b1:e} is not zero; not a Hopf point"
        )));
    }
    let c = cubic_coeffs(params, e2);
    let standard = lyapunov_standard(&c)?;
    let printed = lyapunov_printed(&c)?;
    Ok(LyapunovReport {
        standard,
        printed,
        sign_agrees: standard.signum() == printed.signum(),
    })
}

/// `dB1/dI`.
pub fn b1_prime(params: &ModelParams, i: f64) -> f64 {
    let w = i + params.b;
    let h2 = 2.0 * (params.mu1 - params.mu0) * params.b / (w * w * w);
    params.beta + params.h_prime(i) + h2 * i
}

/// Speed `d Re(lambda) / dA` at which the Hopf pair crosses the axis.
pub fn hopf_transversality(params: &ModelParams, e2: &Equilibrium) -> f64 {
    let delta = params.endemic_quadratic().delta;
    -params.beta * (e2.i + params.b) * b1_prime(params, e2.i) / (2.0 * delta.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BifurcationKind {
    ForwardTranscritical,
    BackwardTranscritical,
    SaddleNode,
    HopfSuper,
    HopfSub,
    GeneralizedHopf,
    BogdanovTakens,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub kind: BifurcationKind,
    pub b: f64,
    pub beta: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

impl BifurcationPoint {
    fn new(kind: BifurcationKind, b: f64, beta: f64) -> Self {
        Self {
            kind,
            b,
            beta,
            diagnostics: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_owned(), value);
        self
    }
}

/// Kind of the transcritical crossing of `C0` at `b`.
pub fn transcritical_kind(params: &ModelParams, b: f64) -> BifurcationKind {
    if b < b_tilde(params) {
        BifurcationKind::BackwardTranscritical
    } else {
        BifurcationKind::ForwardTranscritical
    }
}

/// `B1(I2)` as a function of `(b, beta)`; NaN where `E2` is absent.
pub fn hopf_function(params: &ModelParams, b: f64, beta: f64) -> f64 {
    let p = params.with_b(b).with_beta(beta);
    match require_endemic_high(&p) {
        Ok(e2) => p.b1(e2.i),
        Err(_) => f64::NAN,
    }
}

/// Scan settings for Hopf roots in `beta` at fixed `b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfScan {
    /// Upper end of the scan as a multiple of the `E2` existence floor.
    pub beta_span: f64,
    pub samples: usize,
}

impl Default for HopfScan {
    fn default() -> Self {
        Self {
            beta_span: 100.0,
            samples: 2000,
        }
    }
}

/// Every `beta` with `B1(I2) = 0` at this `b`, ascending.
pub fn hopf_betas(params: &ModelParams, b: f64, scan: HopfScan) -> Vec<f64> {
    let lo = endemic_beta_floor(params, b) * (1.0 + 1e-9);
    let grid = roots::geomspace(lo, lo * scan.beta_span, scan.samples);
    roots::all_roots(|beta| hopf_function(params, b, beta), &grid)
}

/// Which root of `Psi` the Hopf point sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsiRoot {
    Low,
    High,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfPoint {
    pub b: f64,
    pub beta: f64,
    pub i2: f64,
    pub b0: f64,
    pub lyapunov: LyapunovReport,
    pub transversality: f64,
    pub psi_root: PsiRoot,
}

impl HopfPoint {
    fn at(params: &ModelParams, b: f64, beta: f64) -> Result<Self> {
        let p = params.with_b(b).with_beta(beta);
        let e2 = require_endemic_high(&p)?;
        let b0 = p.b0(e2.i);
        if b0 <= 0.0 {
            return Err(Error::Rejected(format!("B0(I2) = {b0} at b = {b}")));
        }
        Ok(Self {
            b,
            beta,
            i2: e2.i,
            b0,
            lyapunov: first_lyapunov(&p, &e2)?,
            transversality: hopf_transversality(&p, &e2),
            psi_root: if p.psi_prime(e2.i) < 0.0 {
                PsiRoot::Low
            } else {
                PsiRoot::High
            },
        })
    }

    pub fn kind(&self) -> BifurcationKind {
        if self.lyapunov.standard < 0.0 {
            BifurcationKind::HopfSuper
        } else {
            BifurcationKind::HopfSub
        }
    }

    pub fn curve_point(&self) -> BifCurvePoint {
        BifCurvePoint {
            b: self.b,
            beta: self.beta,
            curve: CurveTag::Hopf,
        }
    }
}

/// Sampled Hopf curve, ordered along the curve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HopfCurve {
    pub points: Vec<HopfPoint>,
    /// Abscissae where no admissible root was found.
    pub omitted: Vec<f64>,
}

/// Traces `B1(I2) = 0` over `b_range`, collecting every root at each `b`.
///
/// The curve is assumed to fold at most once: it is ordered as the top root
/// by increasing `b`, then the remaining roots by decreasing `b`.
pub fn trace_hopf_curve(
    params: &ModelParams,
    b_range: (f64, f64),
    n_points: usize,
    scan: HopfScan,
) -> HopfCurve {
    let bs = roots::linspace(b_range.0, b_range.1, n_points.max(2));
    let per_b: Vec<(f64, Vec<HopfPoint>)> = bs
        .par_iter()
        .map(|&b| {
            let pts = hopf_betas(params, b, scan)
                .into_iter()
                .filter_map(|beta| HopfPoint::at(params, b, beta).ok())
                .collect();
            (b, pts)
        })
        .collect();
    let mut curve = HopfCurve::default();
    let mut lower = Vec::new();
    for (b, mut pts) in per_b {
        if pts.is_empty() {
            curve.omitted.push(b);
            continue;
        }
        pts.sort_by(|x, y| y.beta.total_cmp(&x.beta));
        curve.points.push(pts[0]);
        lower.extend(pts.into_iter().skip(1));
    }
    lower.sort_by(|x, y| y.b.total_cmp(&x.b));
    curve.points.extend(lower);
    curve
}

/// Projects the chord point `(b, beta) + t n` onto `B1(I2) = 0`.
fn project_on_hopf(
    params: &ModelParams,
    base: (f64, f64),
    normal: (f64, f64),
    reach: f64,
) -> Result<(f64, f64)> {
    let g = |t: f64| hopf_function(params, base.0 + t * normal.0, base.1 + t * normal.1);
    let n = 40;
    let grid = roots::linspace(-reach, reach, n + 1);
    let ts = roots::all_roots(g, &grid);
    let t = ts
        .into_iter()
        .min_by(|x, y| x.abs().total_cmp(&y.abs()))
        .ok_or_else(|| Error::NotFound("Hopf curve not crossed along chord normal".into()))?;
    Ok((base.0 + t * normal.0, base.1 + t * normal.1))
}

/// Bisects the first sign change of `L1` along the sampled curve.
pub fn locate_generalized_hopf(params: &ModelParams, curve: &HopfCurve) -> Result<BifurcationPoint> {
    let (lo, hi) = curve
        .points
        .windows(2)
        .map(|w| (w[0], w[1]))
        .find(|(x, y)| x.lyapunov.standard.signum() != y.lyapunov.standard.signum())
        .ok_or_else(|| Error::NotFound("L1 keeps its sign along the Hopf curve".into()))?;
    let chord = (hi.b - lo.b, hi.beta - lo.beta);
    // Rescale so both coordinates weigh similarly.
    let sb = lo.b.abs().max(1e-12);
    let sbeta = lo.beta.abs().max(1e-12);
    let (cu, cv) = (chord.0 / sb, chord.1 / sbeta);
    let len = cu.hypot(cv);
    let normal = (-cv / len * sb, cu / len * sbeta);
    let reach = len;
    let eval = |s: f64| -> Result<(f64, f64, HopfPoint)> {
        let base = (lo.b + s * chord.0, lo.beta + s * chord.1);
        let (b, beta) = project_on_hopf(params, base, normal, reach)?;
        let pt = HopfPoint::at(params, b, beta)?;
        Ok((b, beta, pt))
    };
    let l1 = |s: f64| eval(s).map(|x| x.2.lyapunov.standard).unwrap_or(f64::NAN);
    let scale = lo.lyapunov.standard.abs().max(hi.lyapunov.standard.abs());
    let s = roots::brent_tol(l1, 0.0, 1.0, 1e-14, roots::MAX_ITER)?;
    let (b, beta, pt) = eval(s)?;
    if pt.lyapunov.standard.abs() > 1e-8 * scale {
        return Err(Error::NoConvergence {
            iterations: roots::MAX_ITER,
        });
    }
    let p = params.with_b(b).with_beta(beta);
    let step = 1e-4;
    let before = eval((s - step).max(0.0))?.2.lyapunov.standard;
    let after = eval((s + step).min(1.0))?.2.lyapunov.standard;
    Ok(BifurcationPoint::new(BifurcationKind::GeneralizedHopf, b, beta)
        .with("L1", pt.lyapunov.standard)
        .with("L1_printed", pt.lyapunov.printed)
        .with("L1_before", before)
        .with("L1_after", after)
        .with("I2", pt.i2)
        .with("B1", p.b1(pt.i2))
        .with("transversality", pt.transversality))
}

/// Hopf/saddle-node contact on `C_Delta^+`: `{B1(I*) = 0, Delta = 0}` with
/// `I* = -A1 / (2 A2)`, seeded by a scan along `C_Delta^+` and polished by
/// Newton's method with a finite-difference Jacobian.
pub fn locate_bogdanov_takens(params: &ModelParams, samples: usize) -> Vec<BifurcationPoint> {
    let i_star = |b: f64, beta: f64| {
        let q = params.with_b(b).with_beta(beta).endemic_quadratic();
        -q.a1 / (2.0 * q.a2)
    };
    let residual = |b: f64, beta: f64| -> [f64; 2] {
        let p = params.with_b(b).with_beta(beta);
        let q = p.endemic_quadratic();
        let scale = (q.a1 * q.a1).max(1e-300);
        [p.b1(i_star(b, beta)) / (p.d + beta * i_star(b, beta).abs()), q.delta / scale]
    };
    let bt = b_tilde(params);
    let grid = roots::linspace(bt * 1e-6, bt * (1.0 - 1e-6), samples.max(8));
    let on_cdelta = |b: f64| {
        let beta = curve_cdelta(params, b, Branch::Plus);
        let p = params.with_b(b).with_beta(beta);
        p.b1(i_star(b, beta))
    };
    let seeds = roots::all_roots(on_cdelta, &grid);
    let mut out = Vec::new();
    for b0 in seeds {
        let mut x = [b0, curve_cdelta(params, b0, Branch::Plus)];
        let mut converged = false;
        for _ in 0..50 {
            let r = residual(x[0], x[1]);
            if r[0].abs() < 1e-13 && r[1].abs() < 1e-13 {
                converged = true;
                break;
            }
            let hb = 1e-7 * x[0].abs().max(1e-9);
            let hbeta = 1e-7 * x[1].abs();
            let rb = residual(x[0] + hb, x[1]);
            let rbeta = residual(x[0], x[1] + hbeta);
            let jac = [
                [(rb[0] - r[0]) / hb, (rbeta[0] - r[0]) / hbeta],
                [(rb[1] - r[1]) / hb, (rbeta[1] - r[1]) / hbeta],
            ];
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let db = (r[0] * jac[1][1] - jac[0][1] * r[1]) / det;
            let dbeta = (jac[0][0] * r[1] - jac[1][0] * r[0]) / det;
            x = [x[0] - db, x[1] - dbeta];
            if db.abs() < 1e-15 * x[0].abs() && dbeta.abs() < 1e-15 * x[1].abs() {
                converged = true;
                break;
            }
        }
        if !converged {
            continue;
        }
        let p = params.with_b(x[0]).with_beta(x[1]);
        let i = i_star(x[0], x[1]);
        out.push(
            BifurcationPoint::new(BifurcationKind::BogdanovTakens, x[0], x[1])
                .with("I", i)
                .with("B0", p.b0(i))
                .with("B1", p.b1(i))
                .with("Delta", p.endemic_quadratic().delta),
        );
    }
    out
}
