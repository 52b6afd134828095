//! The experiment recipes behind each subcommand.

use std::path::Path;

use consensus_lab::anc::{
    averaging_time_report, empirical_averaging_time, AveragingParams, AveragingTimeReport, EmpiricalSetup, PassGrid,
};
use consensus_lab::and::{erasure_mse_exact, run_and, AndSetup, Snapshots, TrajectoryRecord};
use consensus_lab::models::{noise_statistics, LinkFailureModel, NoiseModel};
use consensus_lab::montecarlo::{mean_and_variance, par_map};
use consensus_lab::spectral::{Graph, Laplacian};
use consensus_lab::RngStream;
use rand::Rng;

use crate::config::{ExperimentConfig, FailureSpec, NoiseSpec, Recipe, X0Spec};
use crate::error::{HarnessError, Result};
use crate::table::{Cell, ResultTable, Shrink};

/// Stream ids under the master seed.
const RUN_STREAM: u64 = 1;
const ANC_STREAM: u64 = 2;
const SENSOR_STREAM: u64 = u64::MAX - 1;
const X0_STREAM: u64 = u64::MAX;

/// Paper run counts; fewer runs are reported as shrunk defaults.
const PAPER_MSE_RUNS: usize = 50;
const PAPER_RUNS_PER_X0: usize = 100;

#[derive(Debug, Default)]
pub struct RecipeOutput {
    pub tables: Vec<ResultTable>,
    /// Additional `(file name, contents)` pairs.
    pub files: Vec<(String, String)>,
    pub shrunk: Vec<Shrink>,
    /// Lines for stdout.
    pub summary: Vec<String>,
}

pub fn run_recipe(recipe: Recipe, config: &ExperimentConfig, base_dir: &Path) -> Result<RecipeOutput> {
    config.validate()?;
    let graph = config.build_graph(base_dir)?;
    match recipe {
        Recipe::AndPaths => and_paths(config, graph),
        Recipe::AndMse => and_mse(config, graph),
        Recipe::AndTradeoff => and_tradeoff(config, graph),
        Recipe::AncOptimize => anc_optimize(config, graph),
        Recipe::AncTradeoff => anc_tradeoff(config, graph),
        Recipe::AncTightness => anc_tightness(config, graph),
        Recipe::GraphInfo => graph_info(graph),
    }
}

struct AndEnv {
    failure: LinkFailureModel,
    noise: NoiseModel,
    x0: Vec<f64>,
}

fn and_env(config: &ExperimentConfig, graph: Graph) -> Result<AndEnv> {
    let n = graph.node_count();
    let noise = config.noise_model(Some(&graph))?;
    let failure = config.failure_model(graph)?;
    let x0 = match &config.and.x0 {
        X0Spec::Uniform { low, high } => {
            let mut rng = RngStream::new(config.seed, X0_STREAM);
            (0..n).map(|_| rng.random_range(*low..*high)).collect()
        }
        X0Spec::Values { values } => {
            if values.len() != n {
                return Err(HarnessError::Config(format!("and.x0 has {} values for {n} nodes", values.len())));
            }
            values.clone()
        }
    };
    Ok(AndEnv { failure, noise, x0 })
}

fn and_runs(
    config: &ExperimentConfig,
    env: &AndEnv,
    scale: f64,
    snapshots: &Snapshots,
) -> Result<Vec<TrajectoryRecord>> {
    let weights = config.weights(scale)?;
    let root = RngStream::new(config.seed, RUN_STREAM);
    let setup = AndSetup { weights: &weights, failure: &env.failure, noise: &env.noise };
    par_map(config.and.runs, |k| run_and(&env.x0, setup, config.and.iterations, root.fork(k as u64), snapshots))
        .into_iter()
        .map(|r| r.map_err(HarnessError::from))
        .collect()
}

fn network_sq_err(state: &[f64], r: f64) -> f64 {
    state.iter().map(|v| (v - r) * (v - r)).sum::<f64>() / state.len() as f64
}

fn and_paths(config: &ExperimentConfig, graph: Graph) -> Result<RecipeOutput> {
    let env = and_env(config, graph)?;
    let weights = config.weights(config.and.scale)?;
    let setup = AndSetup { weights: &weights, failure: &env.failure, noise: &env.noise };
    let rec = run_and(
        &env.x0,
        setup,
        config.and.iterations,
        RngStream::new(config.seed, RUN_STREAM).fork(0),
        &Snapshots::Every(config.and.record_every),
    )?;
    let mut table = ResultTable::new("and_paths", &["iter", "node", "value"]);
    for s in &rec.snapshots {
        for (node, v) in s.state.iter().enumerate() {
            table.push(vec![s.iter.into(), node.into(), (*v).into()]);
        }
    }
    let spread = final_spread(&rec.final_state);
    Ok(RecipeOutput {
        tables: vec![table],
        summary: vec![format!(
            "iterations {}: final spread {spread:.3e}, average {:.4} (initial {:.4})",
            config.and.iterations,
            rec.final_row().x_avg,
            rec.initial_average
        )],
        ..Default::default()
    })
}

pub fn final_spread(x: &[f64]) -> f64 {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

/// `zeta` for erasure or static links with additive noise; `None` otherwise.
fn exact_mse(config: &ExperimentConfig, env: &AndEnv) -> Result<Option<f64>> {
    let p = match config.failure {
        FailureSpec::Static => 0.0,
        FailureSpec::Erasure { p } => p,
        FailureSpec::PerLink { .. } => return Ok(None),
    };
    if matches!(env.noise, NoiseModel::MultiplicativeMarkov { .. }) {
        return Ok(None);
    }
    let sigma2 = env.noise.link_variance()?;
    let g = env.failure.base();
    Ok(Some(erasure_mse_exact(g.edge_count(), sigma2, p, g.node_count(), &config.weights(config.and.scale)?)?))
}

fn and_mse(config: &ExperimentConfig, graph: Graph) -> Result<RecipeOutput> {
    let n = graph.node_count();
    let env = and_env(config, graph)?;
    let sensor = match config.and.sensor {
        Some(s) if s >= n => return Err(HarnessError::Config(format!("and.sensor = {s} but the graph has {n} nodes"))),
        Some(s) => s,
        None => RngStream::new(config.seed, SENSOR_STREAM).random_range(0..n),
    };
    let zeta = exact_mse(config, &env)?;
    let recs = and_runs(config, &env, config.and.scale, &Snapshots::Every(config.and.record_every))?;

    let mut table = ResultTable::new("and_mse", &["run", "iter", "sensor", "sensor_sq_err", "network_sq_err", "zeta"]);
    for (run, rec) in recs.iter().enumerate() {
        let r = rec.initial_average;
        for s in &rec.snapshots {
            table.push(vec![
                run.into(),
                s.iter.into(),
                sensor.into(),
                ((s.state[sensor] - r).powi(2)).into(),
                network_sq_err(&s.state, r).into(),
                zeta.into(),
            ]);
        }
    }
    let finals: Vec<f64> = recs.iter().map(|rec| network_sq_err(&rec.final_state, rec.initial_average)).collect();
    let (mean, var) = mean_and_variance(&finals);
    let se = (var / finals.len() as f64).sqrt();
    let mut summary =
        ResultTable::new("and_mse_summary", &["runs", "iterations", "zeta", "mean_final_sq_err", "std_error"]);
    summary.push(vec![config.and.runs.into(), config.and.iterations.into(), zeta.into(), mean.into(), se.into()]);

    let mut shrunk = Vec::new();
    if config.and.runs < PAPER_MSE_RUNS {
        shrunk.push(Shrink {
            parameter: "and.runs".into(),
            paper: PAPER_MSE_RUNS as f64,
            used: config.and.runs as f64,
        });
    }
    let zeta_text = zeta.map_or("n/a".to_string(), |z| format!("{z:.5}"));
    Ok(RecipeOutput {
        tables: vec![table, summary],
        shrunk,
        summary: vec![format!(
            "{} runs of {} iterations: mean final squared error {mean:.5} +- {se:.5}, zeta = {zeta_text}",
            config.and.runs, config.and.iterations
        )],
        ..Default::default()
    })
}

fn and_tradeoff(config: &ExperimentConfig, graph: Graph) -> Result<RecipeOutput> {
    let env = and_env(config, graph)?;
    let mut table = ResultTable::new("and_tradeoff", &["scale", "iter", "network_sq_err"]);
    let mut summary = Vec::new();
    for &scale in &config.and.scales {
        // Common random numbers: every scale reuses the same run streams.
        let recs = and_runs(config, &env, scale, &Snapshots::Every(config.and.record_every))?;
        let steps = recs[0].snapshots.len();
        let mut last = 0.0;
        for k in 0..steps {
            let iter = recs[0].snapshots[k].iter;
            let mean = recs.iter().map(|rec| network_sq_err(&rec.snapshots[k].state, rec.initial_average)).sum::<f64>()
                / recs.len() as f64;
            table.push(vec![scale.into(), iter.into(), mean.into()]);
            last = mean;
        }
        summary.push(format!("scale {scale}: network squared error {last:.4} at iteration {}", config.and.iterations));
    }
    Ok(RecipeOutput { tables: vec![table], summary, ..Default::default() })
}

struct AncEnv {
    failure: LinkFailureModel,
    noise: NoiseModel,
    lambda2: f64,
    lambda_max: f64,
    n: usize,
}

fn anc_env(config: &ExperimentConfig, graph: Graph) -> Result<AncEnv> {
    let n = graph.node_count();
    let noise = config.noise_model(Some(&graph))?;
    let failure = config.failure_model(graph)?;
    let mean = failure.mean_laplacian()?;
    let (lambda2, lambda_max) = (mean.algebraic_connectivity()?, mean.spectral_radius()?);
    if !mean.is_connected()? {
        return Err(HarnessError::Config(format!(
            "the mean graph is disconnected (lambda_2 = {lambda2:e}); A-NC needs a connected network"
        )));
    }
    Ok(AncEnv { failure, noise, lambda2, lambda_max, n })
}

/// `anc.phi2_max` if set, else the configured target, else the noise statistics.
fn phi2_max(config: &ExperimentConfig, env: &AncEnv) -> Result<f64> {
    if let Some(p) = config.anc.phi2_max {
        return Ok(p);
    }
    match (&config.noise, &env.noise) {
        (NoiseSpec::GaussianPhi2 { phi2_max }, _) => Ok(*phi2_max),
        (_, NoiseModel::None) => Ok(0.0),
        (_, noise) => Ok(noise_statistics(noise, &env.failure)?.phi2_max),
    }
}

fn params(config: &ExperimentConfig, env: &AncEnv, eps: f64, phi2: f64) -> AveragingParams {
    AveragingParams { eps, delta: config.anc.delta, k_radius: config.anc.k_radius, phi2_max: phi2, n: env.n }
}

fn anc_optimize(config: &ExperimentConfig, graph: Graph) -> Result<RecipeOutput> {
    let env = anc_env(config, graph)?;
    let phi2 = phi2_max(config, &env)?;
    let mut table = ResultTable::new("anc_optimize", &["eps", "alpha_star", "gamma2", "That_star"]);
    for &eps in &config.sweep.eps {
        let r = averaging_time_report(env.lambda2, env.lambda_max, &params(config, &env, eps, phi2), None)?;
        table.push(vec![eps.into(), r.alpha_star.into(), r.gamma2.into(), r.t_hat_star.into()]);
    }
    Ok(RecipeOutput {
        tables: vec![table],
        summary: vec![format!(
            "lambda_2 = {:.4}, lambda_N = {:.4}, alpha_bullet = {:.4}, phi2_max = {phi2}",
            env.lambda2,
            env.lambda_max,
            2.0 / (env.lambda2 + env.lambda_max)
        )],
        ..Default::default()
    })
}

fn anc_tradeoff(config: &ExperimentConfig, graph: Graph) -> Result<RecipeOutput> {
    let env = anc_env(config, graph)?;
    let mut table = ResultTable::new(
        "anc_tradeoff",
        &["phi2_max", "eps", "alpha_star", "i_star", "p_star", "That_star", "i_ceil", "p_ceil"],
    );
    for &phi2 in &config.sweep.phi2_max {
        for &eps in &config.sweep.eps {
            let r = averaging_time_report(env.lambda2, env.lambda_max, &params(config, &env, eps, phi2), None)?;
            table.push(vec![
                phi2.into(),
                eps.into(),
                r.alpha_star.into(),
                r.i_star.into(),
                r.p_star.into(),
                r.t_hat_star.into(),
                r.i_ceil.into(),
                r.p_ceil.into(),
            ]);
        }
    }
    Ok(RecipeOutput { tables: vec![table], ..Default::default() })
}

fn anc_tightness(config: &ExperimentConfig, graph: Graph) -> Result<RecipeOutput> {
    let env = anc_env(config, graph)?;
    if env.failure.is_static() {
        let limit = 2.0 / env.lambda_max;
        if let Some(a) = config.anc.alphas.iter().find(|&&a| a >= limit) {
            return Err(HarnessError::Config(format!(
                "anc.alphas contains {a}, which is not below 2 / lambda_N = {limit}; A-NC diverges on this graph"
            )));
        }
    }
    let phi2 = phi2_max(config, &env)?;
    let mut reports = config
        .sweep
        .eps
        .iter()
        .map(|&eps| averaging_time_report(env.lambda2, env.lambda_max, &params(config, &env, eps, phi2), None))
        .collect::<consensus_lab::Result<Vec<AveragingTimeReport>>>()?;

    let bullet = 2.0 / (env.lambda2 + env.lambda_max);
    let mut alphas: Vec<f64> = reports.iter().map(|r| r.alpha_star).collect();
    alphas.extend(config.anc.alpha_fractions.iter().map(|f| f * bullet));
    alphas.extend(&config.anc.alphas);
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();

    let c = &config.anc;
    let setup = EmpiricalSetup {
        failure: &env.failure,
        noise: &env.noise,
        eps: config.sweep.eps.clone(),
        delta: c.delta,
        k_radius: c.k_radius,
        alphas,
        x0_samples: c.x0_samples,
        runs_per_x0: c.runs_per_x0,
        grid: PassGrid::Recommended { points: c.grid_points, factor: c.grid_factor },
        confidence: c.confidence,
    };
    let times = empirical_averaging_time(&setup, &RngStream::new(config.seed, ANC_STREAM))?;

    let mut table = ResultTable::new(
        "anc_tightness",
        &["eps", "alpha_star", "gamma2", "That_star", "i_star", "p_star", "T_emp", "ratio"],
    );
    let mut summary = Vec::new();
    for (r, t) in reports.iter_mut().zip(times) {
        r.empirical = Some(t);
        let t_emp = r.empirical.as_ref().and_then(|e| e.t());
        table.push(vec![
            r.eps.into(),
            r.alpha_star.into(),
            r.gamma2.into(),
            r.t_hat_star.into(),
            r.i_star.into(),
            r.p_star.into(),
            t_emp.into(),
            r.ratio().into(),
        ]);
        summary.push(match t_emp {
            Some(t) => {
                format!("eps {}: T_emp = {t}, That* = {:.1}, ratio {:.2}", r.eps, r.t_hat_star, r.t_hat_star / t as f64)
            }
            None => format!("eps {}: no grid point reached the target, That* = {:.1}", r.eps, r.t_hat_star),
        });
    }
    let json = serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n";

    let mut shrunk = Vec::new();
    if c.runs_per_x0 < PAPER_RUNS_PER_X0 {
        shrunk.push(Shrink {
            parameter: "anc.runs_per_x0".into(),
            paper: PAPER_RUNS_PER_X0 as f64,
            used: c.runs_per_x0 as f64,
        });
    }
    Ok(RecipeOutput { tables: vec![table], files: vec![("anc_tightness_reports.json".into(), json)], shrunk, summary })
}

fn graph_info(graph: Graph) -> Result<RecipeOutput> {
    let l = Laplacian::from_graph(&graph);
    let (l2, ln) = (l.algebraic_connectivity()?, l.spectral_radius()?);
    let bullet = 2.0 / (l2 + ln);
    let mut table = ResultTable::new(
        "graph_info",
        &["nodes", "edges", "max_degree", "components", "lambda2", "lambda_max", "alpha_bullet"],
    );
    table.push(vec![
        graph.node_count().into(),
        graph.edge_count().into(),
        graph.max_degree().into(),
        graph.component_count().into(),
        l2.into(),
        ln.into(),
        Cell::from(bullet),
    ]);
    Ok(RecipeOutput {
        tables: vec![table],
        summary: vec![format!(
            "N = {}, M = {}, lambda_2 = {l2:.6}, lambda_N = {ln:.6}, alpha_bullet = {bullet:.6}",
            graph.node_count(),
            graph.edge_count()
        )],
        ..Default::default()
    })
}
