//! One function per subcommand. Each writes its files under the output
//! directory and prints a JSON summary on stdout.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use rdsir_core::bifurcation::{
    anchor_points, locate_bogdanov_takens, locate_generalized_hopf, threshold_curves,
    trace_hopf_curve, transcritical_kind, AnchorPoints, BifurcationKind, BifurcationPoint, HopfPoint,
    HopfScan, PsiRoot,
};
use rdsir_core::kinetics::{
    classify_psi, existence_case, find_equilibria, jacobian_at, require_endemic_high,
    stability_e2, E2Stability, Equilibrium, ExistenceCase, PsiClassification,
};
use rdsir_core::pattern::{classify_pattern, PatternReport};
use rdsir_core::pde::{simulate, FieldState, Grid1D};
use rdsir_core::spectral::{
    classify_with_diffusion, dispersion_scan, hopf_mode_threshold, turing_hopf_detect,
    turing_thresholds, BetaScan, GammaBounds, ModeHopf, TuringClass, TuringHopfPoint,
};
use rdsir_core::temporal::{find_limit_cycles, integrate_ode, CycleCensus, CycleSearch};
use rdsir_core::{classify_region, Region};
use serde::Serialize;

use crate::config::{Axis, OutputFormat, RunConfig, SweepMode};
use crate::export::{self, fmt_f64};
use crate::{CliError, Command};

pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub raster: bool,
}

impl Context {
    fn out_dir(&self) -> Result<&Path, CliError> {
        fs::create_dir_all(&self.out)?;
        Ok(&self.out)
    }
}

pub fn dispatch(cmd: &Command, ctx: &Context) -> Result<(), CliError> {
    match cmd {
        Command::Equilibria => equilibria(ctx),
        Command::Bifdiagram => bifdiagram(ctx),
        Command::Dispersion => dispersion(ctx),
        Command::TuringScan => turing_scan(ctx),
        Command::HopfCurve => hopf_curve(ctx),
        Command::TuringHopf(_) => turing_hopf(ctx),
        Command::Simulate(_) => simulate_cmd(ctx),
        Command::Classify(a) => classify(ctx, &a.input),
        Command::Sweep => sweep(ctx),
        Command::Cycles => cycles(ctx),
    }
}

/// Writes `name` under the output directory and echoes it on stdout.
fn emit<T: Serialize>(ctx: &Context, name: &str, value: &T) -> Result<(), CliError> {
    let path = ctx.out_dir()?.join(name);
    export::write_json(&path, value)?;
    let mut stdout = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, value)?;
    writeln!(stdout)?;
    Ok(())
}

#[derive(Serialize)]
struct EquilibriumRow {
    #[serde(flatten)]
    point: Equilibrium,
    eigenvalues: [Complex64; 2],
    /// `stable`, `unstable`, `saddle` or `nonhyperbolic`.
    stability: &'static str,
}

#[derive(Serialize)]
struct EquilibriaReport {
    r0: f64,
    region: Region,
    existence: ExistenceCase,
    psi: PsiClassification,
    e2_stability: Option<E2Stability>,
    equilibria: Vec<EquilibriumRow>,
}

fn stability_tag(eig: &[Complex64; 2]) -> &'static str {
    let scale = eig[0].norm().max(eig[1].norm()).max(1e-300);
    let sign = |z: &Complex64| {
        if z.re.abs() <= 1e-12 * scale {
            0
        } else {
            z.re.signum() as i32
        }
    };
    match (sign(&eig[0]), sign(&eig[1])) {
        (-1, -1) => "stable",
        (1, 1) => "unstable",
        (1, -1) | (-1, 1) => "saddle",
        _ => "nonhyperbolic",
    }
}

fn equilibria(ctx: &Context) -> Result<(), CliError> {
    let p = ctx.cfg.model()?;
    let rows = find_equilibria(&p)
        .into_iter()
        .map(|e| {
            let eigenvalues = jacobian_at(&p, e.s, e.i).eigenvalues();
            EquilibriumRow {
                point: e,
                eigenvalues,
                stability: stability_tag(&eigenvalues),
            }
        })
        .collect();
    let report = EquilibriaReport {
        r0: p.basic_reproduction_number(),
        region: classify_region(&p, p.b, p.beta),
        existence: existence_case(&p),
        psi: classify_psi(&p),
        e2_stability: stability_e2(&p).ok(),
        equilibria: rows,
    };
    emit(ctx, "equilibria.json", &report)
}

fn b_grid(cfg: &RunConfig) -> Vec<f64> {
    Axis {
        key: "b".into(),
        min: cfg.b_min,
        max: cfg.b_max,
        count: cfg.resolution,
    }
    .values()
}

#[derive(Serialize)]
struct SpecialPoints {
    anchors: AnchorPoints,
    transcritical: BifurcationKind,
    generalized_hopf: Option<BifurcationPoint>,
    bogdanov_takens: Vec<BifurcationPoint>,
    hopf_points: usize,
    /// `b` values where the Hopf scan found nothing usable.
    hopf_omitted: Vec<f64>,
}

fn bifdiagram(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let p = cfg.model()?;
    let bs = b_grid(cfg);
    let mut curve_rows: Vec<(String, f64, f64)> = threshold_curves(&p, &bs)
        .into_iter()
        .map(|c| (c.curve.as_str().to_string(), c.b, c.beta))
        .collect();
    let hopf = trace_hopf_curve(&p, (cfg.b_min, cfg.b_max), cfg.resolution, HopfScan::default());
    curve_rows.extend(hopf.points.iter().map(|h| {
        let c = h.curve_point();
        (c.curve.as_str().to_string(), c.b, c.beta)
    }));
    let dir = ctx.out_dir()?;
    let mut csv = String::from("curve,b,beta\n");
    for (tag, b, beta) in &curve_rows {
        csv.push_str(&format!("{tag},{},{}\n", fmt_f64(*b), fmt_f64(*beta)));
    }
    fs::write(dir.join("bifdiagram.csv"), csv)?;
    let gh = locate_generalized_hopf(&p, &hopf);
    let special = SpecialPoints {
        anchors: anchor_points(&p),
        transcritical: transcritical_kind(&p, p.b),
        generalized_hopf: gh.as_ref().ok().cloned(),
        bogdanov_takens: locate_bogdanov_takens(&p, 400),
        hopf_points: hopf.points.len(),
        hopf_omitted: hopf.omitted.clone(),
    };
    emit(ctx, "special_points.json", &special)?;
    gh.map(|_| ()).map_err(CliError::from)
}

#[derive(Serialize)]
struct HopfCurveSummary {
    points: usize,
    supercritical: usize,
    subcritical: usize,
    omitted: Vec<f64>,
    generalized_hopf: Option<BifurcationPoint>,
}

fn hopf_curve(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let p = cfg.model()?;
    let curve = trace_hopf_curve(&p, (cfg.b_min, cfg.b_max), cfg.resolution, HopfScan::default());
    let mut csv = String::from("b,beta,I2,B0,L1,L1_printed,transversality,psi_root\n");
    for h in &curve.points {
        let root = match h.psi_root {
            PsiRoot::Low => "low",
            PsiRoot::High => "high",
        };
        let vals = [h.b, h.beta, h.i2, h.b0, h.lyapunov.standard, h.lyapunov.printed, h.transversality];
        let cols: Vec<String> = vals.iter().map(|v| fmt_f64(*v)).collect();
        csv.push_str(&format!("{},{root}\n", cols.join(",")));
    }
    fs::write(ctx.out_dir()?.join("hopf_curve.csv"), csv)?;
    let count = |k| curve.points.iter().filter(|h: &&HopfPoint| h.kind() == k).count();
    let summary = HopfCurveSummary {
        points: curve.points.len(),
        supercritical: count(BifurcationKind::HopfSuper),
        subcritical: count(BifurcationKind::HopfSub),
        omitted: curve.omitted.clone(),
        generalized_hopf: locate_generalized_hopf(&p, &curve).ok(),
    };
    emit(ctx, "hopf_curve.json", &summary)
}

/// `E2`, required to be stable for the kinetics.
fn stable_e2(cfg: &RunConfig) -> Result<(rdsir_core::ModelParams, Equilibrium), CliError> {
    let p = cfg.model()?;
    let e2 = require_endemic_high(&p)?;
    match stability_e2(&p)? {
        E2Stability::Stable => Ok((p, e2)),
        other => Err(rdsir_core::Error::Precondition(format!(
            "E2 = ({}, {}) is {other:?} for the kinetics; diffusion-driven analysis needs a stable E2",
            e2.s, e2.i
        ))
        .into()),
    }
}

#[derive(Serialize)]
struct DispersionSummary {
    e2: Equilibrium,
    unstable_modes: Vec<u32>,
    fastest_mode: u32,
    fastest_rate: f64,
}

fn dispersion(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let (p, e2) = stable_e2(cfg)?;
    let modes = dispersion_scan(&p, &cfg.diffusion()?, &e2, cfg.k_max);
    let rows: Vec<Vec<f64>> = modes
        .iter()
        .map(|m| {
            let [l1, l2] = m.eigenvalues;
            vec![
                m.k as f64,
                m.wavenumber,
                m.tk,
                m.dk,
                l1.re,
                l1.im,
                l2.re,
                l2.im,
                if m.unstable { 1.0 } else { 0.0 },
            ]
        })
        .collect();
    export::write_table(
        &ctx.out_dir()?.join("dispersion.csv"),
        &["k", "wavenumber", "T_k", "D_k", "re1", "im1", "re2", "im2", "unstable"],
        &rows,
    )?;
    let fastest = modes
        .iter()
        .max_by(|a, b| a.growth_rate().total_cmp(&b.growth_rate()))
        .expect("mode 0 is always present");
    let summary = DispersionSummary {
        e2,
        unstable_modes: modes.iter().filter(|m| m.unstable).map(|m| m.k).collect(),
        fastest_mode: fastest.k,
        fastest_rate: fastest.growth_rate(),
    };
    emit(ctx, "dispersion.json", &summary)
}

#[derive(Serialize)]
struct TuringScanSummary {
    e2: Equilibrium,
    r2: f64,
    ell: f64,
    table: Vec<(u32, f64)>,
    k_bar: u32,
    k_hat: f64,
    k_breve: u32,
    gamma: GammaBounds,
    stable_regime: bool,
    multi_minimum: bool,
    distinct: bool,
    /// Classification at the configured `r1`.
    r1: f64,
    classification: TuringClass,
}

fn turing_scan(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let (p, e2) = stable_e2(cfg)?;
    let diff = cfg.diffusion()?;
    let th = turing_thresholds(&p, &diff, &e2)?;
    let rows: Vec<Vec<f64>> = th.table.iter().map(|&(k, r1)| vec![k as f64, r1]).collect();
    export::write_table(&ctx.out_dir()?.join("turing_scan.csv"), &["k", "r1"], &rows)?;
    let summary = TuringScanSummary {
        e2,
        r2: diff.r2,
        ell: diff.ell,
        table: th.table.clone(),
        k_bar: th.k_bar,
        k_hat: th.k_hat,
        k_breve: th.k_breve,
        gamma: th.gamma,
        stable_regime: th.stable_regime,
        multi_minimum: th.multi_minimum,
        distinct: th.distinct,
        r1: diff.r1,
        classification: classify_with_diffusion(&p, &diff, &e2)?,
    };
    emit(ctx, "turing_scan.json", &summary)
}

#[derive(Serialize)]
struct TuringHopfReport {
    point: TuringHopfPoint,
    /// Hopf threshold of mode `k2` at the point's `r1`.
    mode_hopf: Option<ModeHopf>,
}

fn turing_hopf(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let p = cfg.model()?;
    let diff = cfg.diffusion()?;
    let point = turing_hopf_detect(&p, &diff, cfg.k1, cfg.k2, BetaScan::default())?;
    let mode_hopf = hopf_mode_threshold(&p, &diff.with_r1(point.r1), cfg.k2, BetaScan::default()).ok();
    emit(ctx, "turing_hopf.json", &TuringHopfReport { point, mode_hopf })
}

/// Extra facts about a run that the pattern report does not carry.
#[derive(Serialize)]
struct RunSummary {
    recipe: Option<String>,
    n: usize,
    ell: f64,
    dt: f64,
    steps: usize,
    snapshots: usize,
    final_t: f64,
    min_value: f64,
    final_mass: f64,
    failure: Option<String>,
}

fn write_run(ctx: &Context, grid: &Grid1D, snaps: &[FieldState], failure: Option<String>) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let dir = ctx.out_dir()?;
    fs::write(dir.join("config.txt"), cfg.dump())?;
    match cfg.format {
        OutputFormat::Csv => export::write_spacetime_csv(&dir.join("spacetime.csv"), grid, snaps)?,
        OutputFormat::Binary => export::write_spacetime_blob(dir, grid, snaps)?,
    }
    export::write_modes_csv(&dir.join("modes.csv"), grid, snaps, cfg.k_max as usize)?;
    if ctx.raster && !snaps.is_empty() {
        fs::write(dir.join("S.ppm"), export::heatmap_ppm(snaps, |f| &f.s))?;
        fs::write(dir.join("I.ppm"), export::heatmap_ppm(snaps, |f| &f.i))?;
    }
    let summary = RunSummary {
        recipe: cfg.recipe.clone(),
        n: grid.n,
        ell: grid.ell,
        dt: cfg.dt,
        steps: cfg.sim_config()?.steps(),
        snapshots: snaps.len(),
        final_t: snaps.last().map_or(0.0, |s| s.t),
        min_value: snaps.iter().map(FieldState::min_value).fold(f64::INFINITY, f64::min),
        final_mass: snaps.last().map_or(f64::NAN, |s| s.total_mass(grid)),
        failure,
    };
    export::write_json(&dir.join("run.json"), &summary)
}

/// A failed run with whatever it produced before aborting.
pub struct RunFailure {
    pub partial: Option<(Grid1D, Vec<FieldState>)>,
    pub error: CliError,
}

/// Runs the configured simulation. On abort the partial output ends with the
/// last good state.
pub fn run_simulation(cfg: &RunConfig) -> Result<(Grid1D, Vec<FieldState>), RunFailure> {
    let setup = || -> Result<_, CliError> {
        let p = cfg.model()?;
        let diff = cfg.diffusion()?;
        let sim = cfg.sim_config()?;
        let init = cfg.initial().build(&p, &sim.grid)?;
        Ok((p, diff, sim, init))
    };
    let (p, diff, sim, init) = setup().map_err(|error| RunFailure {
        partial: None,
        error,
    })?;
    match simulate(&p, &diff, &sim, &init) {
        Ok(snaps) => Ok((sim.grid, snaps)),
        Err(fail) => {
            let mut snaps = fail.snapshots;
            if snaps.last().map_or(true, |s| s.t < fail.last_good.t) {
                snaps.push(fail.last_good);
            }
            Err(RunFailure {
                partial: Some((sim.grid, snaps)),
                error: fail.error.into(),
            })
        }
    }
}

fn simulate_cmd(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let (grid, snaps) = match run_simulation(cfg) {
        Ok(ok) => ok,
        Err(RunFailure { partial, error }) => {
            if let Some((grid, snaps)) = partial {
                write_run(ctx, &grid, &snaps, Some(error.to_string()))?;
            }
            return Err(error);
        }
    };
    write_run(ctx, &grid, &snaps, None)?;
    let report = classify_pattern(&grid, &snaps, cfg.window())?;
    emit(ctx, "report.json", &report)
}

fn classify(ctx: &Context, input: &Path) -> Result<(), CliError> {
    let (grid, snaps) = export::read_spacetime(input)?;
    let (first, last) = match (snaps.first(), snaps.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(CliError::Input("no snapshots".into())),
    };
    let window = (
        ctx.cfg.window_start.unwrap_or(0.5 * (first + last)),
        ctx.cfg.window_end.unwrap_or(last),
    );
    let report = classify_pattern(&grid, &snaps, window)?;
    emit(ctx, "report.json", &report)
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdCell {
    pub e2: Equilibrium,
    pub e2_stability: E2Stability,
    /// Only for a kinetically stable `E2`.
    pub turing_class: Option<TuringClass>,
    /// Modes with a real positive eigenvalue.
    pub turing_modes: Vec<u32>,
    /// Modes with a complex pair in the right half plane.
    pub hopf_modes: Vec<u32>,
    pub leading_mode: u32,
    pub leading_rate: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellOutcome {
    Threshold(ThresholdCell),
    Pattern(PatternReport),
    Error(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepCell {
    pub x: f64,
    pub y: Option<f64>,
    #[serde(flatten)]
    pub outcome: CellOutcome,
}

#[derive(Serialize)]
struct SweepReport {
    mode: &'static str,
    x_key: String,
    x_values: Vec<f64>,
    y_key: Option<String>,
    y_values: Vec<f64>,
    /// Row-major: `y` outer, `x` inner.
    cells: Vec<SweepCell>,
}

fn threshold_cell(cfg: &RunConfig) -> Result<ThresholdCell, CliError> {
    let p = cfg.model()?;
    let diff = cfg.diffusion()?;
    let e2 = require_endemic_high(&p)?;
    let e2_stability = stability_e2(&p)?;
    let modes = dispersion_scan(&p, &diff, &e2, cfg.k_max);
    let leading = modes
        .iter()
        .max_by(|a, b| a.growth_rate().total_cmp(&b.growth_rate()))
        .expect("mode 0 is always present");
    let growing = |complex: bool| {
        modes
            .iter()
            .filter(|m| m.unstable && (m.eigenvalues[0].im != 0.0) == complex)
            .map(|m| m.k)
            .collect()
    };
    Ok(ThresholdCell {
        e2,
        e2_stability,
        turing_class: match e2_stability {
            E2Stability::Stable => classify_with_diffusion(&p, &diff, &e2).ok(),
            _ => None,
        },
        turing_modes: growing(false),
        hopf_modes: growing(true),
        leading_mode: leading.k,
        leading_rate: leading.growth_rate(),
    })
}

pub fn pattern_cell(cfg: &RunConfig) -> Result<PatternReport, CliError> {
    let (grid, snaps) = run_simulation(cfg).map_err(|f| f.error)?;
    Ok(classify_pattern(&grid, &snaps, cfg.window())?)
}

fn sweep(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let x = cfg
        .sweep_x
        .clone()
        .ok_or_else(|| CliError::Config("sweep needs `sweep_x = key:min:max:count`".into()))?;
    let xs = x.values();
    let ys = cfg.sweep_y.as_ref().map(Axis::values);
    let jobs: Vec<(f64, Option<f64>)> = match &ys {
        Some(ys) => ys.iter().flat_map(|&y| xs.iter().map(move |&xv| (xv, Some(y)))).collect(),
        None => xs.iter().map(|&xv| (xv, None)).collect(),
    };
    let cells: Vec<SweepCell> = jobs
        .par_iter()
        .map(|&(xv, yv)| {
            let outcome = (|| -> Result<CellOutcome, CliError> {
                let mut c = cfg.with_value(&x.key, xv)?;
                if let (Some(axis), Some(yv)) = (&cfg.sweep_y, yv) {
                    c = c.with_value(&axis.key, yv)?;
                }
                c.validate()?;
                Ok(match cfg.sweep_mode {
                    SweepMode::Threshold => CellOutcome::Threshold(threshold_cell(&c)?),
                    SweepMode::Pattern => CellOutcome::Pattern(pattern_cell(&c)?),
                })
            })()
            .unwrap_or_else(|e| CellOutcome::Error(e.to_string()));
            SweepCell { x: xv, y: yv, outcome }
        })
        .collect();
    let report = SweepReport {
        mode: match cfg.sweep_mode {
            SweepMode::Threshold => "threshold",
            SweepMode::Pattern => "pattern",
        },
        x_key: x.key.clone(),
        x_values: xs,
        y_key: cfg.sweep_y.as_ref().map(|a| a.key.clone()),
        y_values: ys.unwrap_or_default(),
        cells,
    };
    emit(ctx, "sweep.json", &report)
}

fn cycles(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let p = cfg.model()?;
    let search = CycleSearch {
        t_transient: cfg.t_transient,
        t_measure: cfg.t_measure,
        ..CycleSearch::default()
    };
    let census: CycleCensus = find_limit_cycles(&p, &cfg.seeds, search)?;
    let dir = ctx.out_dir()?;
    // One revolution of every cycle, then each seed's forward orbit.
    let mut orbits = String::from("cycle,t,S,I\n");
    for (idx, c) in census.cycles.iter().enumerate() {
        let traj = integrate_ode(&p, c.section_point, c.period, search.tol).map_err(rdsir_core::Error::from)?;
        for (t, y) in traj.times.iter().zip(&traj.states) {
            orbits.push_str(&format!("{idx},{},{},{}\n", fmt_f64(*t), fmt_f64(y[0]), fmt_f64(y[1])));
        }
    }
    fs::write(dir.join("cycle_orbits.csv"), orbits)?;
    let mut seeds = String::from("seed,t,S,I\n");
    for (idx, &s) in cfg.seeds.iter().enumerate() {
        let traj = match integrate_ode(&p, s, cfg.ode_t_end, search.tol) {
            Ok(t) => t,
            Err(f) => f.partial,
        };
        for (t, y) in traj.times.iter().zip(&traj.states) {
            seeds.push_str(&format!("{idx},{},{},{}\n", fmt_f64(*t), fmt_f64(y[0]), fmt_f64(y[1])));
        }
    }
    fs::write(dir.join("seed_orbits.csv"), seeds)?;
    emit(ctx, "cycles.json", &census)
}
