use std::path::PathBuf;

use clap::Args;
use joint_spectrum::walk::Projection;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_BUDGET: u64 = 2_000_000;
pub const DEFAULT_R: f64 = 0.05;
pub const DEFAULT_EPS: f64 = 0.2;

/// Flags shared by every experiment. Each command reads the ones it needs
/// and fills in its own defaults; the resolved values go to the manifest.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct Params {
    /// Matrix-set JSON file.
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Word length or walk length; a comma list where a command takes
    /// several (decay, defect, cone).
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Number of support directions.
    #[arg(long)]
    pub dirs: Option<usize>,
    /// Cells per axis (rate) or theta points per axis (mgf).
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Exterior power index.
    #[arg(long)]
    pub k: Option<usize>,
    /// Largest number of products enumerated per level.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub prune_delta: Option<f64>,
    /// kappa or lambda.
    #[arg(long)]
    pub projection: Option<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Radius of the theta grid (mgf).
    #[arg(long)]
    pub theta_max: Option<f64>,
    /// Longest word tried as a fixing element (ams).
    #[arg(long)]
    pub f_len: Option<usize>,
    /// Walk length and sample count of the Lyapunov pre-estimate (decay).
    #[arg(long)]
    pub lyap_n: Option<usize>,
    #[arg(long)]
    pub lyap_samples: Option<usize>,
    /// Word appended to the generators (cone), as generator indices.
    #[arg(long, value_delimiter = ',')]
    pub extra_word: Option<Vec<usize>>,
}

impl Params {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    pub fn budget(&self) -> u64 {
        self.budget.unwrap_or(DEFAULT_BUDGET)
    }

    pub fn r(&self) -> f64 {
        self.r.unwrap_or(DEFAULT_R)
    }

    pub fn eps_or(&self, default: f64) -> f64 {
        self.eps.unwrap_or(default)
    }

    /// Single length, `default` when absent.
    pub fn single_n(&self, default: usize) -> CliResult<usize> {
        match self.n.as_deref() {
            None => Ok(default),
            Some([n]) => Ok(*n),
            Some(_) => Err(CliError::invalid("--n takes a single value for this command")),
        }
    }

    pub fn n_list(&self, default: &[usize]) -> Vec<usize> {
        self.n.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn projection(&self) -> CliResult<Projection> {
        match &self.projection {
            None => Ok(Projection::Kappa),
            Some(p) => p.parse().map_err(CliError::from),
        }
    }
}
