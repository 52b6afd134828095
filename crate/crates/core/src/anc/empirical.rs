//! Monte-Carlo estimate of the averaging time over sampled initial states.
//!
//! For each weight on the grid, initial states are drawn on the sphere
//! `||x0 - r 1|| = K` (with `r = 0`), and each is replicated `runs_per_x0`
//! times. A replication runs `max(passes)` passes of `max(iterations)` steps,
//! so every `(iterations, passes)` pair on the grid is read off prefixes of
//! the same runs. A pair succeeds when, for every sampled `x0` and every
//! sensor, the one-sided Clopper-Pearson lower confidence bound on
//! `P(|xbar_n - r| / K <= eps)` is at least `1 - delta`. Because only finitely
//! many initial states are checked, the result is a lower bound on the true
//! averaging time.

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

use super::bounds::{recommended_iterations, AveragingParams};
use crate::engine::Stepper;
use crate::error::{Error, Result};
use crate::models::{noise_statistics, LinkFailureModel, NoiseModel};
use crate::montecarlo::par_map;
use crate::rng::RngStream;

pub const EMPIRICAL_LABEL: &str = "empirical lower bound";

/// How the `(iterations, passes)` search grid is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum PassGrid {
    Fixed {
        iterations: Vec<usize>,
        passes: Vec<usize>,
    },
    /// Log-spaced `points`-point grids on `1..=ceil(factor * max)` where `max`
    /// is the largest recommended `i*` (resp. `p*`) over the `eps` sweep,
    /// per weight.
    Recommended {
        points: usize,
        factor: f64,
    },
}

#[derive(Debug, Clone)]
pub struct EmpiricalSetup<'a> {
    pub failure: &'a LinkFailureModel,
    pub noise: &'a NoiseModel,
    pub eps: Vec<f64>,
    pub delta: f64,
    pub k_radius: f64,
    pub alphas: Vec<f64>,
    pub x0_samples: usize,
    pub runs_per_x0: usize,
    pub grid: PassGrid,
    /// Confidence level of the Clopper-Pearson decision (e.g. 0.95).
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalPoint {
    /// `iterations * passes`.
    pub t: usize,
    pub alpha: f64,
    pub iterations: usize,
    pub passes: usize,
    /// Smallest success fraction over sampled `x0` and sensors.
    pub worst_fraction: f64,
    /// One-sided Clopper-Pearson lower bound for `worst_fraction`.
    pub lower_confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalTime {
    pub eps: f64,
    pub label: &'static str,
    /// `None` when no grid point reached the target.
    pub achieved: Option<EmpiricalPoint>,
    /// Best worst-case success fraction seen anywhere on the grid.
    pub best_fraction: f64,
    pub x0_samples: usize,
    pub runs_per_x0: usize,
}

impl EmpiricalTime {
    pub fn t(&self) -> Option<usize> {
        self.achieved.map(|p| p.t)
    }
}

/// One-sided lower confidence bound on a binomial proportion.
pub fn clopper_pearson_lower(successes: usize, trials: usize, confidence: f64) -> f64 {
    if successes == 0 || trials == 0 {
        return 0.0;
    }
    let tail = 1.0 - confidence;
    if successes == trials {
        return tail.powf(1.0 / trials as f64);
    }
    let beta = Beta::new(successes as f64, (trials - successes + 1) as f64).expect("positive shape parameters");
    beta.inverse_cdf(tail)
}

/// Up to `points` distinct integers, log-spaced on `1..=max`, both ends included.
pub fn log_grid(max: usize, points: usize) -> Vec<usize> {
    let max = max.max(1);
    if points <= 1 {
        return vec![max];
    }
    let top = (max as f64).ln();
    let mut g: Vec<usize> = (0..points)
        .map(|k| (top * k as f64 / (points - 1) as f64).exp().round() as usize)
        .map(|v| v.clamp(1, max))
        .collect();
    g.dedup();
    if *g.last().unwrap() != max {
        g.push(max);
    }
    g
}

/// A point uniform on `{x : sum x = 0, ||x|| = radius}`.
pub fn sample_on_sphere(n: usize, radius: f64, rng: &mut RngStream) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let mean = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|v| *v -= mean);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            x.iter_mut().for_each(|v| *v *= radius / norm);
            return x;
        }
    }
}

struct Grids {
    iterations: Vec<usize>,
    passes: Vec<usize>,
}

fn grids_for(setup: &EmpiricalSetup<'_>, alpha: f64, lambda2: f64, phi2_max: f64) -> Result<Grids> {
    match &setup.grid {
        PassGrid::Fixed { iterations, passes } => {
            let mut iterations = iterations.clone();
            let mut passes = passes.clone();
            iterations.sort_unstable();
            iterations.dedup();
            passes.sort_unstable();
            passes.dedup();
            if iterations.first().is_none_or(|&i| i == 0) || passes.first().is_none_or(|&p| p == 0) {
                return Err(Error::InvalidArgument("grids must be non-empty and positive".into()));
            }
            Ok(Grids { iterations, passes })
        }
        PassGrid::Recommended { points, factor } => {
            let n = setup.failure.base().node_count();
            let (mut i_max, mut p_max) = (1.0_f64, 1.0_f64);
            for &eps in &setup.eps {
                let params = AveragingParams { eps, delta: setup.delta, k_radius: setup.k_radius, phi2_max, n };
                let plan = recommended_iterations(alpha, lambda2, &params)?;
                i_max = i_max.max(plan.i_star);
                p_max = p_max.max(plan.p_star);
            }
            Ok(Grids {
                iterations: log_grid((factor * i_max).ceil() as usize, *points),
                passes: log_grid((factor * p_max).ceil() as usize, *points),
            })
        }
    }
}

/// Counts, per `(eps, iteration grid, pass grid)` cell, the worst sensor's
/// number of successful replications for one initial state.
#[allow(clippy::too_many_arguments)]
fn replicate_x0(
    setup: &EmpiricalSetup<'_>,
    alpha: f64,
    grids: &Grids,
    x0: &[f64],
    streams: &RngStream,
) -> Result<Vec<usize>> {
    let n = x0.len();
    let r = x0.iter().sum::<f64>() / n as f64;
    let (ne, ni, np) = (setup.eps.len(), grids.iterations.len(), grids.passes.len());
    let i_max = *grids.iterations.last().unwrap();
    let p_max = *grids.passes.last().unwrap();
    let tolerances: Vec<f64> = setup.eps.iter().map(|e| e * setup.k_radius).collect();

    let mut counts = vec![0usize; ne * ni * np * n];
    let mut stepper = Stepper::new(n);
    let mut x = vec![0.0; n];
    let mut sums = vec![0.0; ni * n];
    for run in 0..setup.runs_per_x0 {
        let run_stream = streams.fork(run as u64);
        sums.fill(0.0);
        let mut pi = 0;
        for pass in 0..p_max {
            let mut rng = run_stream.fork(pass as u64);
            x.copy_from_slice(x0);
            let mut gi = 0;
            for it in 0..i_max {
                stepper.advance(&mut x, alpha, it, setup.failure, setup.noise, &mut rng)?;
                if it + 1 == grids.iterations[gi] {
                    for (s, v) in sums[gi * n..(gi + 1) * n].iter_mut().zip(&x) {
                        *s += v;
                    }
                    gi += 1;
                }
            }
            if pass + 1 == grids.passes[pi] {
                let inv = 1.0 / (pass + 1) as f64;
                for (e, tol) in tolerances.iter().enumerate() {
                    for g in 0..ni {
                        let base = ((e * ni + g) * np + pi) * n;
                        for (sensor, s) in sums[g * n..(g + 1) * n].iter().enumerate() {
                            if (s * inv - r).abs() <= *tol {
                                counts[base + sensor] += 1;
                            }
                        }
                    }
                }
                pi += 1;
            }
        }
    }
    Ok(counts.chunks_exact(n).map(|per_sensor| *per_sensor.iter().min().unwrap()).collect())
}

/// Empirical averaging time per `eps`, minimised over the weight grid.
pub fn empirical_averaging_time(setup: &EmpiricalSetup<'_>, rng: &RngStream) -> Result<Vec<EmpiricalTime>> {
    if setup.eps.is_empty() || setup.alphas.is_empty() || setup.x0_samples == 0 {
        return Err(Error::InvalidArgument("eps grid, alpha grid and x0 samples must be non-empty".into()));
    }
    if setup.runs_per_x0 < 30 {
        return Err(Error::InvalidArgument(format!("runs_per_x0 = {} is below 30", setup.runs_per_x0)));
    }
    if !(setup.delta > 0.0 && setup.delta < 1.0) || !(setup.confidence > 0.0 && setup.confidence < 1.0) {
        return Err(Error::InvalidArgument("delta and confidence must lie in (0, 1)".into()));
    }
    let runs = setup.runs_per_x0;
    let target = 1.0 - setup.delta;
    let needed = (0..=runs).find(|&k| clopper_pearson_lower(k, runs, setup.confidence) >= target).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "{runs} runs per x0 can never certify success probability {target} at confidence {}",
            setup.confidence
        ))
    })?;

    let n = setup.failure.base().node_count();
    let mean = setup.failure.mean_laplacian()?;
    let lambda2 = mean.algebraic_connectivity()?;
    if matches!(setup.grid, PassGrid::Recommended { .. }) && !mean.is_connected()? {
        return Err(Error::Disconnected { lambda2 });
    }
    let phi2_max = match setup.noise {
        NoiseModel::None => 0.0,
        other => noise_statistics(other, setup.failure)?.phi2_max,
    };

    let x0_root = rng.fork(0);
    let x0s: Vec<Vec<f64>> =
        (0..setup.x0_samples).map(|j| sample_on_sphere(n, setup.k_radius, &mut x0_root.fork(j as u64))).collect();

    let ne = setup.eps.len();
    let mut best: Vec<Option<EmpiricalPoint>> = vec![None; ne];
    let mut best_fraction = vec![0.0_f64; ne];

    for (ai, &alpha) in setup.alphas.iter().enumerate() {
        let grids = grids_for(setup, alpha, lambda2, phi2_max)?;
        let (ni, np) = (grids.iterations.len(), grids.passes.len());
        let alpha_root = rng.fork(1 + ai as u64);
        let per_x0 = par_map(x0s.len(), |j| replicate_x0(setup, alpha, &grids, &x0s[j], &alpha_root.fork(j as u64)))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;

        for e in 0..ne {
            for g in 0..ni {
                for pi in 0..np {
                    let cell = (e * ni + g) * np + pi;
                    let worst = per_x0.iter().map(|c| c[cell]).min().unwrap();
                    let fraction = worst as f64 / runs as f64;
                    best_fraction[e] = best_fraction[e].max(fraction);
                    if worst < needed {
                        continue;
                    }
                    let (iterations, passes) = (grids.iterations[g], grids.passes[pi]);
                    let t = iterations * passes;
                    let better = match best[e] {
                        None => true,
                        Some(b) => (t, iterations) < (b.t, b.iterations),
                    };
                    if better {
                        best[e] = Some(EmpiricalPoint {
                            t,
                            alpha,
                            iterations,
                            passes,
                            worst_fraction: fraction,
                            lower_confidence: clopper_pearson_lower(worst, runs, setup.confidence),
                        });
                    }
                }
            }
        }
    }

    Ok(setup
        .eps
        .iter()
        .enumerate()
        .map(|(e, &eps)| EmpiricalTime {
            eps,
            label: EMPIRICAL_LABEL,
            achieved: best[e],
            best_fraction: best_fraction[e],
            x0_samples: setup.x0_samples,
            runs_per_x0: runs,
        })
        .collect())
}
