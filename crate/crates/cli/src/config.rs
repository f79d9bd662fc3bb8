//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rdsir_core::pde::{Grid1D, Integrator, SimConfig};
use rdsir_core::presets::{InitialSpec, Recipe};
use rdsir_core::spectral::DiffusionParams;
use rdsir_core::ModelParams;

use crate::CliError;

/// Sweep axis `name:min:max:count`, linear.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub key: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        (0..self.count)
            .map(|j| self.min + (self.max - self.min) * j as f64 / (self.count - 1) as f64)
            .collect()
    }

    fn parse(text: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let bad = || CliError::Config(format!("sweep axis `{text}` is not name:min:max:count"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let axis = Axis {
            key: parts[0].to_string(),
            min: parts[1].parse().map_err(|_| bad())?,
            max: parts[2].parse().map_err(|_| bad())?,
            count: parts[3].parse().map_err(|_| bad())?,
        };
        if axis.count == 0 || !SWEEPABLE.contains(&axis.key.as_str()) {
            return Err(CliError::Config(format!(
                "sweep axis `{}` must be one of {} with count >= 1",
                axis.key,
                SWEEPABLE.join(", ")
            )));
        }
        Ok(axis)
    }

    fn render(&self) -> String {
        format!("{}:{}:{}:{}", self.key, self.min, self.max, self.count)
    }
}

const SWEEPABLE: [&str; 8] = ["a", "d", "beta", "mu0", "mu1", "b", "r1", "r2"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    /// Linear stability of every mode at `E2`.
    Threshold,
    /// Full simulation and pattern classification per cell.
    Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Binary,
}

/// Every setting a command can read. Keys are listed in [`RunConfig::KEYS`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub recipe: Option<String>,
    pub a: f64,
    pub d: f64,
    pub beta: f64,
    pub mu0: f64,
    pub mu1: f64,
    pub b: f64,
    pub r1: f64,
    pub r2: f64,
    pub ell: f64,
    pub n: usize,
    pub integrator: Integrator,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_stride: usize,
    /// `None` perturbs `E2`; otherwise the constant state to perturb.
    pub init_s: Option<f64>,
    pub init_i: Option<f64>,
    pub init_amplitude: f64,
    pub init_wavenumber: f64,
    pub window_start: Option<f64>,
    pub window_end: Option<f64>,
    pub b_min: f64,
    pub b_max: f64,
    pub resolution: usize,
    pub k_max: u32,
    pub k1: u32,
    pub k2: u32,
    pub seeds: Vec<(f64, f64)>,
    pub t_transient: f64,
    pub t_measure: f64,
    pub ode_t_end: f64,
    pub sweep_x: Option<Axis>,
    pub sweep_y: Option<Axis>,
    pub sweep_mode: SweepMode,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = rdsir_core::presets::turing_table_params();
        Self {
            recipe: None,
            a: p.a,
            d: p.d,
            beta: p.beta,
            mu0: p.mu0,
            mu1: p.mu1,
            b: p.b,
            r1: 1.0,
            r2: 0.01,
            ell: rdsir_core::presets::DEFAULT_ELL,
            n: rdsir_core::presets::DEFAULT_N,
            integrator: Integrator::ImexCn,
            dt: rdsir_core::presets::DEFAULT_DT,
            t_end: 1000.0,
            snapshot_stride: 100,
            init_s: None,
            init_i: None,
            init_amplitude: rdsir_core::pde::DEFAULT_AMPLITUDE,
            init_wavenumber: rdsir_core::pde::DEFAULT_WAVENUMBER,
            window_start: None,
            window_end: None,
            b_min: 0.0,
            b_max: 0.2,
            resolution: 201,
            k_max: 10,
            k1: 4,
            k2: 3,
            seeds: vec![(0.65, 0.14), (0.4, 0.08)],
            t_transient: 500.0,
            t_measure: 100.0,
            ode_t_end: 200.0,
            sweep_x: None,
            sweep_y: None,
            sweep_mode: SweepMode::Threshold,
            format: OutputFormat::Csv,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.parse::<f64>()
        .map_err(|_| CliError::Config(format!("`{key}` expects a number, got `{v}`")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize, CliError> {
    v.parse::<usize>()
        .map_err(|_| CliError::Config(format!("`{key}` expects a non-negative integer, got `{v}`")))
}

fn parse_opt(key: &str, v: &str) -> Result<Option<f64>, CliError> {
    if v == "auto" {
        Ok(None)
    } else {
        parse_f64(key, v).map(Some)
    }
}

fn render_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".to_string(), |x| x.to_string())
}

impl RunConfig {
    pub const KEYS: [&'static str; 37] = [
        "recipe",
        "a",
        "d",
        "beta",
        "mu0",
        "mu1",
        "b",
        "r1",
        "r2",
        "ell",
        "n",
        "integrator",
        "dt",
        "t_end",
        "snapshot_stride",
        "init_s",
        "init_i",
        "init_amplitude",
        "init_wavenumber",
        "window_start",
        "window_end",
        "b_min",
        "b_max",
        "resolution",
        "k_max",
        "k1",
        "k2",
        "seeds",
        "t_transient",
        "t_measure",
        "ode_t_end",
        "sweep_x",
        "sweep_y",
        "sweep_mode",
        "format",
        // The seed is accepted for reproducibility records only.
        "seed",
        "version",
    ];

    /// Parses `key = value` lines. Later keys win; the recipe, wherever it
    /// appears, is applied first so explicit keys override it.
    pub fn parse_pairs(pairs: &[(String, String)]) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some((_, name)) = pairs.iter().rev().find(|(k, _)| k == "recipe") {
            cfg.apply_recipe(name)?;
        }
        for (k, v) in pairs {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn parse_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(pairs)
    }

    pub fn load(path: &Path) -> Result<Vec<(String, String)>, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_text(&text)
    }

    fn apply_recipe(&mut self, name: &str) -> Result<(), CliError> {
        let r = Recipe::named(name).map_err(|_| {
            CliError::Config(format!(
                "unknown recipe `{name}`; known: {}",
                Recipe::NAMES.join(", ")
            ))
        })?;
        self.recipe = Some(name.to_string());
        let p = r.params;
        (self.a, self.d, self.beta, self.mu0, self.mu1, self.b) =
            (p.a, p.d, p.beta, p.mu0, p.mu1, p.b);
        (self.r1, self.r2, self.ell) = (r.diff.r1, r.diff.r2, r.diff.ell);
        self.n = r.config.grid.n;
        self.integrator = r.config.integrator;
        self.dt = r.config.dt;
        self.t_end = r.config.t_end;
        self.snapshot_stride = r.config.snapshot_stride;
        match r.initial {
            InitialSpec::AroundEndemic {
                amplitude,
                wavenumber,
            } => {
                self.init_s = None;
                self.init_i = None;
                self.init_amplitude = amplitude;
                self.init_wavenumber = wavenumber;
            }
            InitialSpec::AroundPoint {
                s,
                i,
                amplitude,
                wavenumber,
            } => {
                self.init_s = Some(s);
                self.init_i = Some(i);
                self.init_amplitude = amplitude;
                self.init_wavenumber = wavenumber;
            }
        }
        self.window_start = Some(r.window.0);
        self.window_end = Some(r.window.1);
        Ok(())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        match key {
            "recipe" => self.recipe = Some(v.to_string()),
            "a" => self.a = parse_f64(key, v)?,
            "d" => self.d = parse_f64(key, v)?,
            "beta" => self.beta = parse_f64(key, v)?,
            "mu0" => self.mu0 = parse_f64(key, v)?,
            "mu1" => self.mu1 = parse_f64(key, v)?,
            "b" => self.b = parse_f64(key, v)?,
            "r1" => self.r1 = parse_f64(key, v)?,
            "r2" => self.r2 = parse_f64(key, v)?,
            "ell" => self.ell = parse_f64(key, v)?,
            "n" => self.n = parse_usize(key, v)?,
            "integrator" => {
                self.integrator = match v {
                    "imex-cn" => Integrator::ImexCn,
                    "rk4" => Integrator::ExplicitRk4,
                    _ => {
                        return Err(CliError::Config(format!(
                            "`integrator` is imex-cn or rk4, got `{v}`"
                        )))
                    }
                }
            }
            "dt" => self.dt = parse_f64(key, v)?,
            "t_end" => self.t_end = parse_f64(key, v)?,
            "snapshot_stride" => self.snapshot_stride = parse_usize(key, v)?,
            "init_s" => self.init_s = parse_opt(key, v)?,
            "init_i" => self.init_i = parse_opt(key, v)?,
            "init_amplitude" => self.init_amplitude = parse_f64(key, v)?,
            "init_wavenumber" => self.init_wavenumber = parse_f64(key, v)?,
            "window_start" => self.window_start = parse_opt(key, v)?,
            "window_end" => self.window_end = parse_opt(key, v)?,
            "b_min" => self.b_min = parse_f64(key, v)?,
            "b_max" => self.b_max = parse_f64(key, v)?,
            "resolution" => self.resolution = parse_usize(key, v)?,
            "k_max" => self.k_max = parse_usize(key, v)? as u32,
            "k1" => self.k1 = parse_usize(key, v)? as u32,
            "k2" => self.k2 = parse_usize(key, v)? as u32,
            "seeds" => {
                self.seeds = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|pair| {
                        let (s, i) = pair.split_once(':').ok_or_else(|| {
                            CliError::Config(format!("seed `{pair}` is not S:I"))
                        })?;
                        Ok((parse_f64(key, s.trim())?, parse_f64(key, i.trim())?))
                    })
                    .collect::<Result<_, CliError>>()?
            }
            "t_transient" => self.t_transient = parse_f64(key, v)?,
            "t_measure" => self.t_measure = parse_f64(key, v)?,
            "ode_t_end" => self.ode_t_end = parse_f64(key, v)?,
            "sweep_x" => self.sweep_x = (v != "none").then(|| Axis::parse(v)).transpose()?,
            "sweep_y" => self.sweep_y = (v != "none").then(|| Axis::parse(v)).transpose()?,
            "sweep_mode" => {
                self.sweep_mode = match v {
                    "threshold" => SweepMode::Threshold,
                    "pattern" => SweepMode::Pattern,
                    _ => {
                        return Err(CliError::Config(format!(
                            "`sweep_mode` is threshold or pattern, got `{v}`"
                        )))
                    }
                }
            }
            "format" => {
                self.format = match v {
                    "csv" => OutputFormat::Csv,
                    "binary" => OutputFormat::Binary,
                    _ => {
                        return Err(CliError::Config(format!(
                            "`format` is csv or binary, got `{v}`"
                        )))
                    }
                }
            }
            "seed" | "version" => {}
            _ => {
                return Err(CliError::Config(format!(
                    "unknown key `{key}`; known keys: {}",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Every key with its current value, in [`RunConfig::KEYS`] order.
    pub fn to_pairs(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        let axis = |a: &Option<Axis>| a.as_ref().map_or_else(|| "none".to_string(), Axis::render);
        if let Some(r) = &self.recipe {
            m.insert("recipe", r.clone());
        }
        m.insert("a", self.a.to_string());
        m.insert("d", self.d.to_string());
        m.insert("beta", self.beta.to_string());
        m.insert("mu0", self.mu0.to_string());
        m.insert("mu1", self.mu1.to_string());
        m.insert("b", self.b.to_string());
        m.insert("r1", self.r1.to_string());
        m.insert("r2", self.r2.to_string());
        m.insert("ell", self.ell.to_string());
        m.insert("n", self.n.to_string());
        m.insert(
            "integrator",
            match self.integrator {
                Integrator::ImexCn => "imex-cn",
                Integrator::ExplicitRk4 => "rk4",
            }
            .to_string(),
        );
        m.insert("dt", self.dt.to_string());
        m.insert("t_end", self.t_end.to_string());
        m.insert("snapshot_stride", self.snapshot_stride.to_string());
        m.insert("init_s", render_opt(self.init_s));
        m.insert("init_i", render_opt(self.init_i));
        m.insert("init_amplitude", self.init_amplitude.to_string());
        m.insert("init_wavenumber", self.init_wavenumber.to_string());
        m.insert("window_start", render_opt(self.window_start));
        m.insert("window_end", render_opt(self.window_end));
        m.insert("b_min", self.b_min.to_string());
        m.insert("b_max", self.b_max.to_string());
        m.insert("resolution", self.resolution.to_string());
        m.insert("k_max", self.k_max.to_string());
        m.insert("k1", self.k1.to_string());
        m.insert("k2", self.k2.to_string());
        m.insert(
            "seeds",
            self.seeds
                .iter()
                .map(|(s, i)| format!("{s}:{i}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        m.insert("t_transient", self.t_transient.to_string());
        m.insert("t_measure", self.t_measure.to_string());
        m.insert("ode_t_end", self.ode_t_end.to_string());
        m.insert("sweep_x", axis(&self.sweep_x));
        m.insert("sweep_y", axis(&self.sweep_y));
        m.insert(
            "sweep_mode",
            match self.sweep_mode {
                SweepMode::Threshold => "threshold",
                SweepMode::Pattern => "pattern",
            }
            .to_string(),
        );
        m.insert(
            "format",
            match self.format {
                OutputFormat::Csv => "csv",
                OutputFormat::Binary => "binary",
            }
            .to_string(),
        );
        m
    }

    /// Text form that [`RunConfig::parse_text`] reads back to the same
    /// configuration. Floats use the shortest round-trip representation.
    pub fn dump(&self) -> String {
        let pairs = self.to_pairs();
        let mut out = String::from("# rdsir run configuration\n");
        for key in Self::KEYS {
            if let Some(v) = pairs.get(key) {
                let _ = writeln!(out, "{key} = {v}");
            }
        }
        out
    }

    pub fn model(&self) -> Result<ModelParams, CliError> {
        Ok(ModelParams::new(
            self.a, self.d, self.beta, self.mu0, self.mu1, self.b,
        )?)
    }

    pub fn diffusion(&self) -> Result<DiffusionParams, CliError> {
        Ok(DiffusionParams::new(self.r1, self.r2, self.ell)?)
    }

    pub fn grid(&self) -> Result<Grid1D, CliError> {
        Ok(Grid1D::new(self.ell, self.n)?)
    }

    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let mut c = SimConfig::new(self.grid()?, self.dt, self.t_end, self.snapshot_stride);
        c.integrator = self.integrator;
        c.validate(&self.diffusion()?)?;
        Ok(c)
    }

    pub fn initial(&self) -> InitialSpec {
        match (self.init_s, self.init_i) {
            (Some(s), Some(i)) => InitialSpec::AroundPoint {
                s,
                i,
                amplitude: self.init_amplitude,
                wavenumber: self.init_wavenumber,
            },
            _ => InitialSpec::AroundEndemic {
                amplitude: self.init_amplitude,
                wavenumber: self.init_wavenumber,
            },
        }
    }

    /// Analysis window; defaults to the second half of the run.
    pub fn window(&self) -> (f64, f64) {
        (
            self.window_start.unwrap_or(0.5 * self.t_end),
            self.window_end.unwrap_or(self.t_end),
        )
    }

    /// Checks every physical value.
    pub fn validate(&self) -> Result<(), CliError> {
        self.model()?;
        self.diffusion()?;
        self.sim_config()?;
        if self.init_s.is_some() != self.init_i.is_some() {
            return Err(CliError::Config(
                "init_s and init_i must be given together".into(),
            ));
        }
        let (w0, w1) = self.window();
        if !(w0 < w1) {
            return Err(CliError::Config(format!(
                "analysis window [{w0}, {w1}] is empty"
            )));
        }
        if !(self.b_min < self.b_max) || self.resolution < 2 {
            return Err(CliError::Config(
                "need b_min < b_max and resolution >= 2".into(),
            ));
        }
        if self.k1 == 0 || self.k1 == self.k2 {
            return Err(CliError::Config(
                "k1 must be positive and differ from k2".into(),
            ));
        }
        Ok(())
    }

    /// Copy with one sweepable key replaced.
    pub fn with_value(&self, key: &str, value: f64) -> Result<Self, CliError> {
        let mut c = self.clone();
        c.set(key, &value.to_string())?;
        Ok(c)
    }
}
