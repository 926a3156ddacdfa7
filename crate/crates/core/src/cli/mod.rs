//! Command-line front end: config files, flag overrides, output files.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::diagnostics::ScalingMode;
use crate::distances::DistanceClass;
use crate::error::Error;

pub use commands::{cmd_asmussen, cmd_demo_circle, cmd_extract_seq, cmd_regime, cmd_scaling, cmd_sweep, cmd_wasserstein, Outputs};
pub use config::{
    AsmussenSection, CircleSection, ExtractSection, Family, RegimeSection, RunConfig, ScalingSection, SweepSection, TripletSpec,
    WassersteinSection,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub(crate) fn config(e: Error) -> Self {
        match e {
            Error::Io(e) => CliError::Io(e.to_string()),
            e if e.is_numeric() => CliError::Core(e),
            e => CliError::Config(e.to_string()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::Core(Error::Io(_)) => EXIT_IO,
            CliError::Core(e) if e.is_numeric() => EXIT_NUMERIC,
            CliError::Core(_) => EXIT_CONFIG,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Adaptive,
    Fixed,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ClassArg {
    Rays,
    Halfspaces,
    Balls,
    TwoSample,
    W1,
}

impl From<ClassArg> for DistanceClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::Rays => DistanceClass::KolmogorovRays,
            ClassArg::Halfspaces => DistanceClass::HalfSpaces,
            ClassArg::Balls => DistanceClass::CenteredBalls,
            ClassArg::TwoSample => DistanceClass::TwoSampleRays,
            ClassArg::W1 => DistanceClass::Wasserstein1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "levy-clt", version, about = "Gaussian approximation diagnostics for Levy processes")]
struct Cli {
    /// TOML config (or a resolved `.config.json`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed; generated and echoed when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output stem.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism). Does not affect results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    family: Option<Family>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    sigma_shell: Option<f64>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    kappa: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Centring and scaling matrices over a list of times.
    Scaling {
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
    },
    /// Distances to the Gaussian over a geometric time grid.
    Sweep {
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        mc_size: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
        #[arg(long)]
        grid_start: Option<f64>,
        #[arg(long)]
        grid_ratio: Option<f64>,
        #[arg(long)]
        grid_count: Option<usize>,
        #[arg(long, value_enum, value_delimiter = ',')]
        classes: Option<Vec<ClassArg>>,
        #[arg(long)]
        jump_budget: Option<f64>,
    },
    /// Ball-class and two-sample distances for the shrinking-circle example.
    DemoCircle {
        #[arg(long, value_delimiter = ',')]
        n_params: Option<Vec<u64>>,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        reference_size: Option<usize>,
        #[arg(long = "circle-dim")]
        circle_dim: Option<usize>,
    },
    /// Small-time moment limit `n E[g(|X_{1/n}|)]`.
    Asmussen {
        #[arg(long)]
        g: Option<String>,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<u64>>,
        #[arg(long)]
        mc_size: Option<usize>,
    },
    /// Kolmogorov and W1 distances of one-dimensional projections under sqrt(t) sigma scaling.
    Wasserstein {
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
        #[arg(long)]
        mc_size: Option<usize>,
    },
    /// Vanishing sequence of a tabulated function (CSV with columns t,g).
    ExtractSeq {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        delta_scale: Option<f64>,
        #[arg(long)]
        delta_power: Option<f64>,
        #[arg(long)]
        upsilon_scale: Option<f64>,
        #[arg(long)]
        upsilon_power: Option<f64>,
    },
    /// Partial-integral verdicts for several log exponents under both scalings.
    Regime {
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        #[arg(long)]
        mc_size: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
    },
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl Cli {
    /// Config file, then flags on top, then the seed.
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        let t = &mut cfg.triplet;
        set(&mut t.family, self.family);
        set(&mut t.beta, self.beta);
        set(&mut t.sigma_shell, self.sigma_shell);
        set(&mut t.dim, self.dim);
        if self.kappa.is_some() {
            t.kappa = self.kappa;
        }
        match &self.command {
            Command::Scaling { times } => set(&mut cfg.scaling.times, times.clone()),
            Command::Sweep {
                mode,
                mc_size,
                times,
                grid_start,
                grid_ratio,
                grid_count,
                classes,
                jump_budget,
            } => {
                let s = &mut cfg.sweep;
                set(
                    &mut s.mode,
                    mode.map(|m| match m {
                        ModeArg::Adaptive => ScalingMode::AdaptiveBc,
                        ModeArg::Fixed => ScalingMode::FixedSqrtSigma,
                    }),
                );
                set(&mut s.mc_size, *mc_size);
                set(&mut s.times, times.clone());
                set(&mut s.grid_start, *grid_start);
                set(&mut s.grid_ratio, *grid_ratio);
                set(&mut s.grid_count, *grid_count);
                set(&mut s.classes, classes.as_ref().map(|c| c.iter().map(|&c| c.into()).collect()));
                set(&mut s.jump_budget, *jump_budget);
            }
            Command::DemoCircle {
                n_params,
                size,
                reference_size,
                circle_dim,
            } => {
                let c = &mut cfg.circle;
                set(&mut c.n_params, n_params.clone());
                set(&mut c.size, *size);
                set(&mut c.reference_size, *reference_size);
                set(&mut c.dim, *circle_dim);
            }
            Command::Asmussen { g, n_list, mc_size } => {
                let a = &mut cfg.asmussen;
                set(&mut a.g, g.clone());
                set(&mut a.n_list, n_list.clone());
                set(&mut a.mc_size, *mc_size);
            }
            Command::Wasserstein { times, mc_size } => {
                set(&mut cfg.wasserstein.times, times.clone());
                set(&mut cfg.wasserstein.mc_size, *mc_size);
            }
            Command::ExtractSeq {
                input,
                delta_scale,
                delta_power,
                upsilon_scale,
                upsilon_power,
            } => {
                let e = &mut cfg.extract;
                if input.is_some() {
                    e.input = input.clone();
                }
                set(&mut e.delta.scale, *delta_scale);
                set(&mut e.delta.power, *delta_power);
                set(&mut e.upsilon.scale, *upsilon_scale);
                set(&mut e.upsilon.power, *upsilon_power);
            }
            Command::Regime { betas, mc_size, times } => {
                set(&mut cfg.regime.betas, betas.clone());
                set(&mut cfg.regime.mc_size, *mc_size);
                set(&mut cfg.regime.times, times.clone());
            }
        }
        if cfg.seed.is_none() {
            let seed = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos() as u64)
                .unwrap_or(0);
            eprintln!("seed = {seed} (generated)");
            cfg.seed = Some(seed);
        }
        if cfg.out.is_none() {
            cfg.out = Some(PathBuf::from(self.command_name()));
        }
        Ok(cfg)
    }

    fn command_name(&self) -> &'static str {
        match self.command {
            Command::Scaling { .. } => "scaling",
            Command::Sweep { .. } => "sweep",
            Command::DemoCircle { .. } => "demo-circle",
            Command::Asmussen { .. } => "asmussen",
            Command::Wasserstein { .. } => "wasserstein",
            Command::ExtractSeq { .. } => "extract-seq",
            Command::Regime { .. } => "regime",
        }
    }

    fn execute(&self, cfg: &RunConfig) -> Result<Outputs, CliError> {
        match self.command {
            Command::Scaling { .. } => cmd_scaling(cfg),
            Command::Sweep { .. } => cmd_sweep(cfg),
            Command::DemoCircle { .. } => cmd_demo_circle(cfg),
            Command::Asmussen { .. } => cmd_asmussen(cfg),
            Command::Wasserstein { .. } => cmd_wasserstein(cfg),
            Command::ExtractSeq { .. } => cmd_extract_seq(cfg),
            Command::Regime { .. } => cmd_regime(cfg),
        }
    }
}

fn run_parsed(cli: &Cli) -> Result<(), CliError> {
    let cfg = cli.resolve()?;
    let outputs = match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            pool.install(|| cli.execute(&cfg))?
        }
        None => cli.execute(&cfg)?,
    };
    let stem = cfg.out.as_deref().expect("resolved");
    for path in outputs.write(stem, &cfg)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run_parsed(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
