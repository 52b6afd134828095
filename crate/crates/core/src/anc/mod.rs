//! Constant-weight consensus with Monte-Carlo repeated averaging (A-NC).
//!
//! Each of `passes` independent passes runs `iterations` steps of
//! `x <- x - alpha (L(i) x + n(i))` from the same initial state; the estimate
//! at every sensor is the mean of the passes' final states.

mod bounds;
mod empirical;
mod report;

pub use bounds::{
    approx_averaging_time, chernoff_pass_count, error_moment_bounds, gamma2, gamma2_from_spectrum, optimize_alpha,
    recommended_iterations, AlphaOptimum, AveragingParams, IterationPlan, ALPHA_GRID_POINTS, ALPHA_REL_TOL,
};
pub use empirical::{
    clopper_pearson_lower, empirical_averaging_time, log_grid, sample_on_sphere, EmpiricalPoint, EmpiricalSetup,
    EmpiricalTime, PassGrid, EMPIRICAL_LABEL,
};
pub use report::{averaging_time_report, write_sweep_csv, AveragingTimeReport, ProbedWeight, SWEEP_CSV_HEADER};

use serde::Serialize;

use crate::engine::Stepper;
use crate::error::{Error, Result};
use crate::models::{LinkFailureModel, NoiseModel};
use crate::montecarlo::{ordered_vector_sum, par_map};
use crate::rng::RngStream;
use crate::spectral::Laplacian;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AncConfig {
    pub alpha: f64,
    /// Iterations per pass.
    pub iterations: usize,
    pub passes: usize,
    pub k_radius: f64,
    pub eps: f64,
    pub delta: f64,
}

impl AncConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if self.passes == 0 {
            return Err(Error::InvalidArgument("passes must be >= 1".into()));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) || !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidArgument("eps and delta must lie in (0, 1)".into()));
        }
        if !(self.k_radius > 0.0) {
            return Err(Error::InvalidArgument("K must be > 0".into()));
        }
        Ok(())
    }

    /// Checks `0 < alpha < 2 / lambda_N(L)`.
    pub fn check_weight(&self, laplacian: &Laplacian) -> Result<()> {
        let ln = laplacian.spectral_radius()?;
        if self.alpha * ln >= 2.0 {
            return Err(Error::InvalidArgument(format!(
                "alpha = {} must be below 2 / lambda_N = {}",
                self.alpha,
                2.0 / ln
            )));
        }
        Ok(())
    }
}

/// Final states `x^p(i_hat)` of every pass, in pass order. Pass `p` draws
/// from `rng.fork(p)`.
pub fn run_anc_passes(
    x0: &[f64],
    config: &AncConfig,
    failure: &LinkFailureModel,
    noise: &NoiseModel,
    rng: &RngStream,
) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    let n = failure.base().node_count();
    if x0.len() != n {
        return Err(Error::InvalidArgument(format!("x0 has {} entries for {n} nodes", x0.len())));
    }
    par_map(config.passes, |p| {
        let mut stream = rng.fork(p as u64);
        let mut x = x0.to_vec();
        let mut stepper = Stepper::new(n);
        for i in 0..config.iterations {
            stepper.advance(&mut x, config.alpha, i, failure, noise, &mut stream)?;
        }
        Ok(x)
    })
    .into_iter()
    .collect()
}

/// Per-sensor estimates: the average of the passes' final states.
pub fn run_anc(
    x0: &[f64],
    config: &AncConfig,
    failure: &LinkFailureModel,
    noise: &NoiseModel,
    rng: &RngStream,
) -> Result<Vec<f64>> {
    let finals = run_anc_passes(x0, config, failure, noise, rng)?;
    let p = finals.len() as f64;
    Ok(ordered_vector_sum(&finals).into_iter().map(|s| s / p).collect())
}
