use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaussot::{ContinuationMode, FrameConfig};

#[derive(Debug, Parser)]
#[command(name = "gaussot", version, about = "Wasserstein distances, couplings and barycenters of Gaussian laws")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub tol: Tolerances,

    /// Seed for every random draw.
    #[arg(long, global = true, env = "GAUSSOT_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// W2, Bures-Wasserstein and V between two laws.
    Distance(Pair),
    /// Shared-correlation frame and optimal coupling of two laws.
    Coupling(Pair),
    /// Draws from the optimal coupling, one `x,y` row per draw.
    Sample {
        #[command(flatten)]
        pair: Pair,
        /// Number of draws.
        #[arg(long)]
        n: usize,
    },
    /// Barycenter of laws that share a correlation frame.
    Barycenter {
        /// Law files.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Comma-separated weights, one per file (uniform when omitted).
        #[arg(long, value_delimiter = ',', conflicts_with = "alpha")]
        weights: Option<Vec<f64>>,
        /// Weight of the first law when exactly two are given.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Runs the oracle checks on a pair of laws.
    Verify {
        #[command(flatten)]
        pair: Pair,
        /// Draws for the Monte Carlo cost check.
        #[arg(long, default_value_t = 100_000)]
        mc_samples: usize,
    },
}

#[derive(Debug, Args)]
pub struct Pair {
    pub mu: PathBuf,
    pub nu: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Continuation {
    Auto,
    Geometric,
}

#[derive(Debug, Args)]
pub struct Tolerances {
    /// Relative eigenvalue threshold separating singular from invertible.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub rank_tol: f64,
    /// Largest accepted frame reconstruction residual.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub frame_tol: f64,
    /// Tolerance of PSD tests on joint covariances.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub psd_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-2)]
    pub eps0: f64,
    #[arg(long, global = true, default_value_t = 0.5)]
    pub eps_ratio: f64,
    #[arg(long, global = true, default_value_t = 60)]
    pub max_steps: usize,
    #[arg(long, global = true, value_enum, default_value_t = Continuation::Auto)]
    pub continuation: Continuation,
    /// Grid points per axis of the brute-force oracle.
    #[arg(long, global = true, default_value_t = 11)]
    pub grid_resolution: usize,
}

impl Tolerances {
    pub fn frame_config(&self) -> FrameConfig {
        FrameConfig {
            rank_tol: self.rank_tol,
            frame_tol: self.frame_tol,
            eps0: self.eps0,
            eps_ratio: self.eps_ratio,
            max_steps: self.max_steps,
            mode: match self.continuation {
                Continuation::Auto => ContinuationMode::Auto,
                Continuation::Geometric => ContinuationMode::Geometric,
            },
            ..FrameConfig::default()
        }
    }
}
