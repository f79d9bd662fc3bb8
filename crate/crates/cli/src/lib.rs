//! Command-line front end: configuration loading, commands and exporters.

pub mod commands;
pub mod config;
pub mod export;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] rdsir_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad input data: {0}")]
    Input(String),
}

impl CliError {
    /// 2 for configuration problems, 4 when the requested object does not
    /// exist, 3 for everything numerical or otherwise.
    pub fn exit_code(&self) -> i32 {
        use rdsir_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::InvalidParameter { .. } | E::Rejected(_)) => 2,
            CliError::Core(E::NotFound(_)) => 4,
            _ => 3,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "rdsir", version, about = "SIR reaction-diffusion analysis and simulation")]
pub struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration key; repeatable, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Also write PPM heatmaps of S and I (simulate).
    #[arg(long, global = true)]
    pub raster: bool,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Reserved; no computation is random.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// R0, region and equilibria with stability.
    Equilibria,
    /// Threshold and Hopf curves in the (b, beta) plane plus special points.
    Bifdiagram,
    /// Eigenvalues of every mode up to k_max at E2.
    Dispersion,
    /// Turing thresholds r1^(k) at the configured r2.
    TuringScan,
    /// Hopf curve with Lyapunov coefficients over [b_min, b_max].
    HopfCurve,
    /// Turing-Hopf point of two modes.
    TuringHopf(TuringHopfArgs),
    /// Run the PDE and classify the result.
    Simulate(SimulateArgs),
    /// Classify a space-time file written by `simulate`.
    Classify(ClassifyArgs),
    /// One- or two-parameter sweep.
    Sweep,
    /// Limit cycles of the kinetics from the configured seeds.
    Cycles,
}

#[derive(Args, Debug)]
pub struct TuringHopfArgs {
    #[arg(long)]
    pub k1: Option<u32>,
    #[arg(long)]
    pub k2: Option<u32>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Named parameter set; explicit keys still override it.
    #[arg(long)]
    pub recipe: Option<String>,
    /// Space-time output: csv or binary.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// Directory holding spacetime.csv or spacetime.bin.
    #[arg(long)]
    pub input: PathBuf,
}

impl Cli {
    /// File pairs, then `--set`, then subcommand flags.
    pub fn config_pairs(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut pairs = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => Vec::new(),
        };
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{item}`")))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut flag = |k: &str, v: String| pairs.push((k.to_string(), v));
        match &self.command {
            Command::TuringHopf(a) => {
                if let Some(k1) = a.k1 {
                    flag("k1", k1.to_string());
                }
                if let Some(k2) = a.k2 {
                    flag("k2", k2.to_string());
                }
            }
            Command::Simulate(a) => {
                if let Some(r) = &a.recipe {
                    flag("recipe", r.clone());
                }
                if let Some(f) = &a.format {
                    flag("format", f.clone());
                }
            }
            _ => {}
        }
        Ok(pairs)
    }

    pub fn resolve_config(&self) -> Result<RunConfig, CliError> {
        let cfg = RunConfig::parse_pairs(&self.config_pairs()?)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = cli.resolve_config()?;
    if cli.dump_config {
        print!("{}", cfg.dump());
        return Ok(());
    }
    let ctx = commands::Context {
        cfg,
        out: cli.out.clone(),
        raster: cli.raster,
    };
    let work = || commands::dispatch(&cli.command, &ctx);
    match cli.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))?
            .install(work),
        None => work(),
    }
}

fn collect_sets(args: &[OsString]) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = args.iter().skip(1).map(|a| a.to_string_lossy());
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--set" {
            if let Some(v) = it.next() {
                out.push(v.into_owned());
            }
        } else if let Some(v) = a.strip_prefix("--set=") {
            out.push(v.to_string());
        }
    }
    out
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(mut cli) => {
            // clap keeps only the occurrences on one side of the subcommand
            // for a global flag; every `--set` counts, in order.
            cli.set = collect_sets(&args);
            cli
        }
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("rdsir: {e}");
            e.exit_code()
        }
    }
}
