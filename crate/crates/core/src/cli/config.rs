use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{default_grid, Schedule, ScalingMode, DEFAULT_JUMP_BUDGET};
use crate::distances::DistanceClass;
use crate::linalg::Matrix;
use crate::measures::{LevyTriplet, RadialFamily, RadialLevyMeasure};

use super::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    PowerLog,
    BoundedShell,
    Zero,
}

/// Triplet section of a run config. Only the fields of the chosen family are used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TripletSpec {
    pub family: Family,
    pub sigma_shell: f64,
    pub beta: f64,
    pub inner: f64,
    pub outer: f64,
    pub dim: usize,
    /// Row-major `dim x dim`; empty means zero.
    pub gaussian_cov: Vec<f64>,
    /// Truncation constant; `None` picks one automatically.
    pub kappa: Option<f64>,
}

impl Default for TripletSpec {
    fn default() -> Self {
        Self {
            family: Family::PowerLog,
            sigma_shell: std::f64::consts::E,
            beta: 2.0,
            inner: 1.0,
            outer: 10.0,
            dim: 1,
            gaussian_cov: Vec::new(),
            kappa: None,
        }
    }
}

impl TripletSpec {
    pub fn build(&self) -> Result<LevyTriplet<f64>, CliError> {
        let family = match self.family {
            Family::PowerLog => RadialFamily::PowerLog {
                sigma_shell: self.sigma_shell,
                beta: self.beta,
            },
            Family::BoundedShell => RadialFamily::BoundedShell {
                inner: self.inner,
                outer: self.outer,
            },
            Family::Zero => RadialFamily::Zero,
        };
        let measure = RadialLevyMeasure::new(family, self.dim).map_err(CliError::config)?;
        let cov = if self.gaussian_cov.is_empty() {
            Matrix::zeros(self.dim)
        } else {
            Matrix::from_row_major(self.dim, self.gaussian_cov.clone()).map_err(CliError::config)?
        };
        LevyTriplet::centered(cov, measure).map_err(CliError::config)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingSection {
    pub times: Vec<f64>,
}

impl Default for ScalingSection {
    fn default() -> Self {
        Self {
            times: (0..=6).map(|k| 10f64.powi(k)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub mode: ScalingMode,
    /// Explicit grid; when empty the geometric `start * ratio^k` grid is used.
    pub times: Vec<f64>,
    pub grid_start: f64,
    pub grid_ratio: f64,
    pub grid_count: usize,
    pub mc_size: usize,
    pub classes: Vec<DistanceClass>,
    /// Expected jumps per replicate before the small-jump approximation; 0 simulates exactly.
    pub jump_budget: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        let g: Vec<f64> = default_grid();
        Self {
            mode: ScalingMode::AdaptiveBc,
            times: Vec::new(),
            grid_start: g[0],
            grid_ratio: g[1] / g[0],
            grid_count: g.len(),
            mc_size: 100_000,
            classes: vec![DistanceClass::KolmogorovRays],
            jump_budget: DEFAULT_JUMP_BUDGET,
        }
    }
}

impl SweepSection {
    pub fn grid(&self) -> Vec<f64> {
        if !self.times.is_empty() {
            return self.times.clone();
        }
        crate::diagnostics::geometric_grid(self.grid_start, self.grid_ratio, self.grid_count)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircleSection {
    pub n_params: Vec<u64>,
    pub size: usize,
    pub reference_size: usize,
    pub dim: usize,
}

impl Default for CircleSection {
    fn default() -> Self {
        Self {
            n_params: vec![2, 5, 10, 20, 50, 100],
            size: 10_000,
            reference_size: 10_000,
            dim: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AsmussenSection {
    /// `abs^p` with `p` in 1..=3.
    pub g: String,
    pub n_list: Vec<u64>,
    pub mc_size: usize,
}

impl Default for AsmussenSection {
    fn default() -> Self {
        Self {
            g: "abs^3".into(),
            n_list: vec![64, 256, 1024, 4096],
            mc_size: 100_000,
        }
    }
}

impl AsmussenSection {
    pub fn power(&self) -> Result<u32, CliError> {
        let s = self.g.trim();
        let p = s.strip_prefix("abs^").or_else(|| s.strip_prefix("|x|^"));
        match p.and_then(|p| p.parse::<u32>().ok()) {
            Some(p @ 1..=3) => Ok(p),
            _ => Err(CliError::Config(format!("unsupported g spec {s:?}; expected abs^p with p in 1..=3"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WassersteinSection {
    pub times: Vec<f64>,
    pub mc_size: usize,
    pub jump_budget: f64,
}

impl Default for WassersteinSection {
    fn default() -> Self {
        Self {
            times: (2..=6).map(|k| 10f64.powi(k)).collect(),
            mc_size: 100_000,
            jump_budget: DEFAULT_JUMP_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractSection {
    /// CSV with columns `t,g`.
    pub input: Option<PathBuf>,
    pub delta: Schedule<f64>,
    pub upsilon: Schedule<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegimeSection {
    pub betas: Vec<f64>,
    pub times: Vec<f64>,
    pub mc_size: usize,
}

impl Default for RegimeSection {
    fn default() -> Self {
        Self {
            betas: vec![1.0, 2.0, 3.0],
            times: default_grid(),
            mc_size: 100_000,
        }
    }
}

/// Everything a subcommand reads. The resolved form (defaults and flags
/// applied, seed fixed) is written next to every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    /// Output stem; files are `<out>.csv`, `<out>.json`, ...
    pub out: Option<PathBuf>,
    pub triplet: TripletSpec,
    pub scaling: ScalingSection,
    pub sweep: SweepSection,
    pub circle: CircleSection,
    pub asmussen: AsmussenSection,
    pub wasserstein: WassersteinSection,
    pub extract: ExtractSection,
    pub regime: RegimeSection,
}

impl RunConfig {
    /// Reads TOML, or JSON when the file ends in `.json`.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("seed is resolved before commands run")
    }
}
