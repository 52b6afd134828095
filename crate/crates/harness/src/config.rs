//! Experiment configuration.
//!
//! A config file is TOML. Every recipe starts from its own defaults and the
//! file only needs to name what differs; sections are merged key by key, and
//! a section whose `kind` changes is replaced wholesale. The resolved config
//! is serialized back to canonical TOML, and its SHA-256 is the config hash
//! stamped on every output table. The `[output]` section only says where
//! files go, so it is left out of both.

use std::fmt;
use std::path::{Path, PathBuf};

use consensus_lab::and::WeightSequence;
use consensus_lab::models::{LinkFailureModel, NoiseModel};
use consensus_lab::spectral::{erdos_renyi, random_regular, Graph};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config_err, HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Recipe {
    AndPaths,
    AndMse,
    AndTradeoff,
    AncOptimize,
    AncTradeoff,
    AncTightness,
    GraphInfo,
}

impl Recipe {
    pub const ALL: [Recipe; 7] = [
        Recipe::AndPaths,
        Recipe::AndMse,
        Recipe::AndTradeoff,
        Recipe::AncOptimize,
        Recipe::AncTradeoff,
        Recipe::AncTightness,
        Recipe::GraphInfo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Recipe::AndPaths => "and-paths",
            Recipe::AndMse => "and-mse",
            Recipe::AndTradeoff => "and-tradeoff",
            Recipe::AncOptimize => "anc-optimize",
            Recipe::AncTradeoff => "anc-tradeoff",
            Recipe::AncTightness => "anc-tightness",
            Recipe::GraphInfo => "graph-info",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == name)
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    /// Master seed for every random stream except graph generation.
    pub seed: u64,
    pub graph: GraphSpec,
    pub failure: FailureSpec,
    pub noise: NoiseSpec,
    pub and: AndSpec,
    pub anc: AncSpec,
    pub sweep: SweepSpec,
    #[serde(default, skip_serializing)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSpec {
    ErdosRenyi {
        nodes: usize,
        edges: usize,
        seed: u64,
    },
    Regular {
        nodes: usize,
        degree: usize,
        seed: u64,
    },
    /// Relative paths resolve against the config file's directory.
    EdgeList {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FailureSpec {
    Static,
    Erasure {
        p: f64,
    },
    /// One failure probability per edge, in edge-list order.
    PerLink {
        probabilities: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseSpec {
    None,
    Gaussian {
        variance: f64,
    },
    /// Gaussian noise with the variance chosen so that `phi2_max` comes out
    /// as given on the configured graph.
    GaussianPhi2 {
        phi2_max: f64,
    },
    Uniform {
        bound: f64,
    },
    MultiplicativeMarkov {
        theta_variance: f64,
        w_variance: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum X0Spec {
    /// Independent uniform draws on `[low, high)`.
    Uniform {
        low: f64,
        high: f64,
    },
    Values {
        values: Vec<f64>,
    },
}

/// A-ND settings. Weights are `scale / (i + offset)^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AndSpec {
    pub scale: f64,
    pub exponent: f64,
    pub offset: f64,
    /// Weight scales compared by `and-tradeoff`.
    pub scales: Vec<f64>,
    pub iterations: usize,
    pub runs: usize,
    pub record_every: usize,
    /// Sensor whose squared error `and-mse` reports; drawn from the seed if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensor: Option<usize>,
    pub x0: X0Spec,
}

/// A-NC settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AncSpec {
    pub k_radius: f64,
    pub delta: f64,
    /// Overrides the value implied by the noise and failure models in the
    /// analytical recipes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi2_max: Option<f64>,
    pub x0_samples: usize,
    pub runs_per_x0: usize,
    pub grid_points: usize,
    pub grid_factor: f64,
    pub confidence: f64,
    /// Weights tried by `anc-tightness` as fractions of `2 / (lambda_2 + lambda_N)`,
    /// on top of each `alpha*(eps)`.
    pub alpha_fractions: Vec<f64>,
    /// Extra absolute weights tried by `anc-tightness`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub eps: Vec<f64>,
    pub phi2_max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("results") }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

impl ExperimentConfig {
    /// Paper-scale defaults for `recipe`.
    pub fn defaults(recipe: Recipe) -> Self {
        let mut c = ExperimentConfig {
            experiment: recipe.name().to_string(),
            seed: 1,
            graph: GraphSpec::ErdosRenyi { nodes: 100, edges: 500, seed: 2 },
            failure: FailureSpec::Erasure { p: 0.4 },
            noise: NoiseSpec::Gaussian { variance: 30.0 },
            and: AndSpec {
                scale: 0.2,
                exponent: 1.0,
                offset: 1.0,
                scales: vec![0.33, 0.1],
                iterations: 10_000,
                runs: 1,
                record_every: 10,
                sensor: None,
                x0: X0Spec::Uniform { low: 0.0, high: 30.0 },
            },
            anc: AncSpec {
                k_radius: 50.0,
                delta: 0.05,
                phi2_max: None,
                x0_samples: 10,
                runs_per_x0: 100,
                grid_points: 25,
                grid_factor: 3.0,
                confidence: 0.95,
                alpha_fractions: vec![0.25, 0.5, 0.75, 1.0],
                alphas: Vec::new(),
            },
            sweep: SweepSpec { eps: linspace(0.02, 0.5, 10), phi2_max: vec![10.0, 30.0, 100.0] },
            output: OutputSpec::default(),
        };
        match recipe {
            Recipe::AndPaths => {
                c.noise = NoiseSpec::Gaussian { variance: 15.0 };
                c.and.scale = 0.25;
            }
            Recipe::AndMse => {
                c.and.runs = 50;
                c.and.record_every = 100;
            }
            Recipe::AndTradeoff => {
                c.noise = NoiseSpec::Gaussian { variance: 50.0 };
                c.and.runs = 10;
            }
            Recipe::AncOptimize | Recipe::AncTradeoff => {
                c.graph = GraphSpec::Regular { nodes: 230, degree: 6, seed: 1 };
                c.failure = FailureSpec::Static;
                c.noise = NoiseSpec::GaussianPhi2 { phi2_max: 100.0 };
            }
            Recipe::AncTightness => {
                c.failure = FailureSpec::Static;
                c.noise = NoiseSpec::GaussianPhi2 { phi2_max: 80.0 };
                c.sweep.eps = vec![0.05, 0.1, 0.2, 0.4];
            }
            Recipe::GraphInfo => {}
        }
        c
    }

    /// Defaults for `recipe` overlaid with the TOML in `text`.
    pub fn parse(recipe: Recipe, text: &str) -> Result<Self> {
        let user: toml::Table = text.parse().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        let mut merged = toml::Table::try_from(Self::defaults(recipe)).expect("defaults serialize");
        merge(&mut merged, user);
        let config: Self = merged.try_into().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        if config.experiment != recipe.name() {
            return Err(HarnessError::Config(format!(
                "config is for experiment `{}` but `{}` was requested",
                config.experiment, recipe
            )));
        }
        Ok(config)
    }

    /// Canonical TOML of the resolved config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of [`Self::to_toml`].
    pub fn hash(&self) -> String {
        config_hash(&self.to_toml())
    }

    /// Checks everything that can be checked without building the graph.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        match &self.failure {
            FailureSpec::Erasure { p } if !(0.0..=1.0).contains(p) => {
                return bad(format!("failure.p must lie in [0, 1], got {p}"));
            }
            FailureSpec::PerLink { probabilities } => {
                if let Some(p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                    return bad(format!("failure.probabilities must lie in [0, 1], got {p}"));
                }
            }
            _ => {}
        }
        self.noise_model(None)?.validate().map_err(config_err)?;
        let a = &self.and;
        for s in std::iter::once(a.scale).chain(a.scales.iter().copied()) {
            WeightSequence::new(s, a.exponent, a.offset)
                .map_err(|e| HarnessError::Config(format!("[and] weights: {e}")))?;
        }
        if a.scales.is_empty() {
            return bad("and.scales must not be empty".into());
        }
        if a.iterations == 0 || a.runs == 0 || a.record_every == 0 {
            return bad("and.iterations, and.runs and and.record_every must be >= 1".into());
        }
        if let X0Spec::Uniform { low, high } = a.x0 {
            if !(low < high && low.is_finite() && high.is_finite()) {
                return bad(format!("and.x0 needs finite low < high, got [{low}, {high})"));
            }
        }
        let c = &self.anc;
        if !(c.k_radius > 0.0 && c.k_radius.is_finite()) {
            return bad(format!("anc.k_radius must be > 0, got {}", c.k_radius));
        }
        if !(c.delta > 0.0 && c.delta < 1.0) || !(c.confidence > 0.0 && c.confidence < 1.0) {
            return bad("anc.delta and anc.confidence must lie in (0, 1)".into());
        }
        if c.phi2_max.is_some_and(|p| !(p >= 0.0 && p.is_finite())) {
            return bad("anc.phi2_max must be >= 0".into());
        }
        if c.x0_samples == 0 || c.runs_per_x0 == 0 || c.grid_points == 0 || !(c.grid_factor >= 1.0) {
            return bad("anc.x0_samples, anc.runs_per_x0, anc.grid_points must be >= 1 and anc.grid_factor >= 1".into());
        }
        if let Some(f) = c.alpha_fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            return bad(format!("anc.alpha_fractions must lie in (0, 1], got {f}"));
        }
        if let Some(al) = c.alphas.iter().find(|al| !(**al > 0.0 && al.is_finite())) {
            return bad(format!("anc.alphas must be > 0, got {al}"));
        }
        if self.sweep.eps.is_empty() || self.sweep.phi2_max.is_empty() {
            return bad("sweep grids must not be empty".into());
        }
        if let Some(e) = self.sweep.eps.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return bad(format!("sweep.eps values must lie in (0, 1), got {e}"));
        }
        if let Some(p) = self.sweep.phi2_max.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return bad(format!("sweep.phi2_max values must be >= 0, got {p}"));
        }
        Ok(())
    }

    /// Builds the graph; `base_dir` anchors relative edge-list paths.
    pub fn build_graph(&self, base_dir: &Path) -> Result<Graph> {
        match &self.graph {
            GraphSpec::ErdosRenyi { nodes, edges, seed } => erdos_renyi(*nodes, *edges, *seed).map_err(config_err),
            GraphSpec::Regular { nodes, degree, seed } => random_regular(*nodes, *degree, *seed).map_err(config_err),
            GraphSpec::EdgeList { path } => {
                let path = base_dir.join(path);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
                Graph::parse_edge_list(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
            }
        }
    }

    pub fn failure_model(&self, graph: Graph) -> Result<LinkFailureModel> {
        match &self.failure {
            FailureSpec::Static => Ok(LinkFailureModel::fixed(graph)),
            FailureSpec::Erasure { p } => LinkFailureModel::erasure(graph, *p).map_err(config_err),
            FailureSpec::PerLink { probabilities } => {
                LinkFailureModel::per_link(graph, probabilities.clone()).map_err(config_err)
            }
        }
    }

    /// The noise model; `GaussianPhi2` needs the graph to fix its variance.
    pub fn noise_model(&self, graph: Option<&Graph>) -> Result<NoiseModel> {
        Ok(match self.noise {
            NoiseSpec::None => NoiseModel::None,
            NoiseSpec::Gaussian { variance } => NoiseModel::Gaussian { variance },
            NoiseSpec::GaussianPhi2 { phi2_max } => {
                if !(phi2_max >= 0.0 && phi2_max.is_finite()) {
                    return Err(HarnessError::Config(format!("noise.phi2_max must be >= 0, got {phi2_max}")));
                }
                let d_max = graph.map_or(1, Graph::max_degree);
                if d_max == 0 {
                    return Err(HarnessError::Config("noise.phi2_max needs a graph with at least one edge".into()));
                }
                NoiseModel::Gaussian { variance: phi2_max / d_max as f64 }
            }
            NoiseSpec::Uniform { bound } => NoiseModel::Uniform { bound },
            NoiseSpec::MultiplicativeMarkov { theta_variance, w_variance } => {
                NoiseModel::MultiplicativeMarkov { theta_variance, w_variance }
            }
        })
    }

    pub fn weights(&self, scale: f64) -> Result<WeightSequence> {
        WeightSequence::new(scale, self.and.exponent, self.and.offset).map_err(config_err)
    }

    /// Creates the output directory and checks that it is writable.
    pub fn prepare_output(&self) -> Result<PathBuf> {
        let dir = self.output.dir.clone();
        let fail =
            |e: std::io::Error| HarnessError::Config(format!("output dir {} is not writable: {e}", dir.display()));
        std::fs::create_dir_all(&dir).map_err(fail)?;
        let probe = dir.join(format!(".write-probe-{}", std::process::id()));
        std::fs::write(&probe, b"").map_err(fail)?;
        let _ = std::fs::remove_file(&probe);
        Ok(dir)
    }
}

pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o))
                if b.get("kind") == o.get("kind") || o.get("kind").is_none() =>
            {
                merge(b, o)
            }
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}
