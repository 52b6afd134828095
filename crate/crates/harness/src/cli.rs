use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::{Invocation, Recipe};

#[derive(Debug, Parser)]
#[command(
    name = "consensus-lab",
    version,
    about = "Distributed consensus experiments under link failures and channel noise"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML config; unspecified keys take the recipe defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Sensor sample paths of one A-ND run.
    AndPaths,
    /// Squared-error trajectories of repeated A-ND runs against the exact MSE.
    AndMse,
    /// Network squared error for two weight scales.
    AndTradeoff,
    /// Optimal A-NC weight and approximate averaging time over an eps sweep.
    AncOptimize,
    /// Recommended iterations and passes over eps and noise level.
    AncTradeoff,
    /// Empirical averaging time against the analytical bound.
    AncTightness,
    /// Size and Laplacian spectrum of the configured graph.
    GraphInfo,
}

impl Command {
    pub fn recipe(self) -> Recipe {
        match self {
            Command::AndPaths => Recipe::AndPaths,
            Command::AndMse => Recipe::AndMse,
            Command::AndTradeoff => Recipe::AndTradeoff,
            Command::AncOptimize => Recipe::AncOptimize,
            Command::AncTradeoff => Recipe::AncTradeoff,
            Command::AncTightness => Recipe::AncTightness,
            Command::GraphInfo => Recipe::GraphInfo,
        }
    }
}

impl GlobalArgs {
    pub fn invocation(&self) -> Invocation {
        Invocation {
            config_path: self.config.clone(),
            seed: self.seed,
            out: self.out.clone(),
            workers: self.workers.map(|w| w as usize),
        }
    }
}
