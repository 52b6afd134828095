//! Config-driven experiment runner for `consensus-lab`.
//!
//! Each recipe reads an [`ExperimentConfig`], runs one of the numerical
//! studies and writes CSV tables, each with a `.meta.json` sidecar carrying
//! the config hash, seed, wall time, code version and the resolved config.

// Guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod recipes;
pub mod table;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{ExperimentConfig, Recipe};
pub use error::{HarnessError, Result};
pub use table::{Cell, Metadata, ResultTable};

/// One recipe invocation: the config file plus CLI overrides.
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub config_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

#[derive(Debug)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub written: Vec<PathBuf>,
    pub summary: Vec<String>,
}

impl Invocation {
    /// The resolved config and the directory that anchors relative paths in it.
    pub fn resolve(&self, recipe: Recipe) -> Result<(ExperimentConfig, PathBuf)> {
        let (mut config, base) = match &self.config_path {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
                let base = path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
                (ExperimentConfig::parse(recipe, &text)?, base)
            }
            None => (ExperimentConfig::defaults(recipe), PathBuf::from(".")),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.output.dir = out.clone();
        }
        Ok((config, base))
    }

    pub fn workers(&self) -> usize {
        self.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1)
    }

    pub fn run(&self, recipe: Recipe) -> Result<RunReport> {
        let (config, base) = self.resolve(recipe)?;
        config.validate()?;
        let dir = config.prepare_output()?;
        let workers = self.workers();
        let start = Instant::now();
        let output = consensus_lab::montecarlo::with_workers(workers, || recipes::run_recipe(recipe, &config, &base))?;
        let wall_time_s = start.elapsed().as_secs_f64();

        let config_text = config.to_toml();
        let config_hash = config::config_hash(&config_text);
        let mut written = Vec::new();
        for table in &output.tables {
            let meta = Metadata {
                table: table.name.clone(),
                experiment: recipe.name().to_string(),
                columns: table.columns.clone(),
                rows: table.rows().len(),
                config_hash: config_hash.clone(),
                seed: config.seed,
                wall_time_s,
                version: env!("CARGO_PKG_VERSION").to_string(),
                workers,
                shrunk_defaults: output.shrunk.clone(),
                config: config_text.clone(),
            };
            let (csv, json) = table.write(&dir, &meta)?;
            written.extend([csv, json]);
        }
        for (name, contents) in &output.files {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(HarnessError::io(&path))?;
            written.push(path);
        }
        Ok(RunReport { config, written, summary: output.summary })
    }
}
