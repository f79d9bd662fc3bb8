//! Analysis toolkit for a two-species diffusive SIR model whose recovery rate
//! saturates with the number of infected.

pub mod bifurcation;
pub mod error;
pub mod kinetics;
pub mod pattern;
pub mod pde;
pub mod presets;
pub mod roots;
pub mod spectral;
pub mod temporal;

pub use bifurcation::{
    anchor_points, classify_region, cubic_coeffs, first_lyapunov, locate_bogdanov_takens,
    locate_generalized_hopf, threshold_curves, trace_hopf_curve, BifCurvePoint, BifurcationKind,
    BifurcationPoint, CubicSystemCoeffs, CurveTag, HopfCurve, HopfScan, LyapunovReport, Region,
};
pub use error::{Error, Result};
pub use kinetics::{
    classify_psi, find_equilibria, ode_jacobian, stability_e2, E2Stability, Equilibrium,
    EquilibriumKind, ModelParams, OdeJacobian, PsiCase, PsiClassification, QuadraticCoeffs,
};
pub use pattern::{
    classify_pattern, cosine_spectrum, temporal_period, transient_onset, ModeSpectrum,
    PatternClass, PatternReport,
};
pub use pde::{
    default_initial, laplacian_neumann, simulate, FieldState, Grid1D, Integrator, SimConfig,
    SimulationFailure,
};
pub use spectral::{
    dispersion_scan, gamma_bounds, hopf_mode_threshold, jk_matrix, turing_hopf_detect,
    turing_thresholds, BetaScan, DiffusionParams, GammaBounds, SpectralMode, TuringClass,
    TuringHopfPoint, TuringThresholds,
};
pub use temporal::{
    find_limit_cycles, integrate_ode, CycleSearch, CycleStability, LimitCycle, OdeTolerance,
    OdeTrajectory,
};
