//! Consensus with decaying link weights (A-ND): the iteration, trajectory
//! diagnostics, and the closed-form mean-square-error and mean-rate formulas.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::Serialize;

use crate::engine::{consensus_step, Stepper};
use crate::error::{Error, Result};
use crate::models::{LaplacianAction, LinkFailureModel, NoiseModel};
use crate::rng::RngStream;
use crate::spectral::{average, distance_to_consensus};

/// Terms summed explicitly before the Euler-Maclaurin tail takes over.
const EXPLICIT_TERMS: usize = 100_000;

/// `alpha(i) = scale / (i + offset)^exponent`, `exponent` in `(1/2, 1]`.
///
/// That range is exactly the one for which `sum alpha = inf` and
/// `sum alpha^2 < inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightSequence {
    scale: f64,
    exponent: f64,
    offset: f64,
    sum_sq: f64,
}

impl WeightSequence {
    pub fn new(scale: f64, exponent: f64, offset: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("weight scale must be > 0, got {scale}")));
        }
        if !(exponent > 0.5 && exponent <= 1.0) {
            return Err(Error::InvalidArgument(format!("weight exponent must lie in (0.5, 1], got {exponent}")));
        }
        if !(offset >= 1.0 && offset.is_finite()) {
            return Err(Error::InvalidArgument(format!("weight offset must be >= 1, got {offset}")));
        }
        let sum_sq = scale * scale * unit_sum_of_squares(exponent, offset);
        Ok(Self { scale, exponent, offset, sum_sq })
    }

    /// `scale / (i + 1)`.
    pub fn harmonic(scale: f64) -> Result<Self> {
        Self::new(scale, 1.0, 1.0)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.scale / (i as f64 + self.offset).powf(self.exponent)
    }

    /// `sum_{i >= 0} alpha(i)^2`.
    pub fn sum_of_squares(&self) -> f64 {
        self.sum_sq
    }

    /// `sum_{j < n} alpha(j)`.
    pub fn partial_sum(&self, n: usize) -> f64 {
        self.range_sum(0, n)
    }

    /// `sum_{from <= j < to} alpha(j)`.
    pub fn range_sum(&self, from: usize, to: usize) -> f64 {
        (from..to).map(|j| self.alpha(j)).sum()
    }

    /// Same shape, every weight multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidArgument(format!("rescale factor must be > 0, got {factor}")));
        }
        Ok(Self { scale: self.scale * factor, sum_sq: self.sum_sq * factor * factor, ..*self })
    }
}

/// `sum_{j >= 0} (j + a)^(-2 beta)`.
fn unit_sum_of_squares(beta: f64, a: f64) -> f64 {
    if beta == 1.0 && a == 1.0 {
        return PI * PI / 6.0;
    }
    let q = 2.0 * beta;
    let f = |x: f64| x.powf(-q);
    // Smallest terms first.
    let head: f64 = (0..EXPLICIT_TERMS).rev().map(|j| f(j as f64 + a)).sum();
    let x = EXPLICIT_TERMS as f64 + a;
    let tail = x.powf(1.0 - q) / (q - 1.0) + 0.5 * f(x) + q * x.powf(-q - 1.0) / 12.0
        - q * (q + 1.0) * (q + 2.0) * x.powf(-q - 3.0) / 720.0;
    head + tail
}

/// One A-ND update, `x - alpha_i (L_i x + n_i)`.
pub fn and_step<L: LaplacianAction + ?Sized>(x: &[f64], alpha_i: f64, laplacian: &L, noise: &[f64]) -> Vec<f64> {
    consensus_step(x, alpha_i, laplacian, noise)
}

/// Which full-state snapshots a run keeps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Snapshots {
    #[default]
    None,
    /// Iterations `0, k, 2k, ...` and the final one.
    Every(usize),
    /// Exactly these iterations (those within the run).
    At(Vec<usize>),
}

impl Snapshots {
    fn wants(&self, i: usize, last: usize) -> bool {
        match self {
            Self::None => false,
            Self::Every(k) => i.is_multiple_of((*k).max(1)) || i == last,
            Self::At(list) => list.contains(&i),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub iter: usize,
    pub x_avg: f64,
    pub dist_consensus: f64,
    pub sq_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub iter: usize,
    pub state: Vec<f64>,
}

/// Per-iteration diagnostics of one run, iteration 0 included.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub initial_average: f64,
    pub rows: Vec<TrajectoryRow>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: Vec<f64>,
}

impl TrajectoryRecord {
    pub fn final_row(&self) -> &TrajectoryRow {
        self.rows.last().expect("a record always holds iteration 0")
    }

    pub fn snapshot_at(&self, iter: usize) -> Option<&[f64]> {
        self.snapshots.iter().find(|s| s.iter == iter).map(|s| s.state.as_slice())
    }

    /// CSV with header `iter,x_avg,dist_consensus,sq_err`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "iter,x_avg,dist_consensus,sq_err")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.iter, r.x_avg, r.dist_consensus, r.sq_err)?;
        }
        Ok(())
    }

    /// CSV with header `iter,node,value`.
    pub fn write_snapshots_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "iter,node,value")?;
        for s in &self.snapshots {
            for (node, v) in s.state.iter().enumerate() {
                writeln!(w, "{},{},{}", s.iter, node, v)?;
            }
        }
        Ok(())
    }
}

/// The random environment an A-ND run iterates in.
#[derive(Debug, Clone, Copy)]
pub struct AndSetup<'a> {
    pub weights: &'a WeightSequence,
    pub failure: &'a LinkFailureModel,
    pub noise: &'a NoiseModel,
}

/// Runs `iterations` A-ND steps from `x0`, drawing `L(i)` and `n(i)` afresh
/// at every step from `rng`.
pub fn run_and(
    x0: &[f64],
    setup: AndSetup<'_>,
    iterations: usize,
    rng: RngStream,
    snapshots: &Snapshots,
) -> Result<TrajectoryRecord> {
    if iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be >= 1".into()));
    }
    let n = setup.failure.base().node_count();
    if x0.len() != n {
        return Err(Error::InvalidArgument(format!("x0 has {} entries for {n} nodes", x0.len())));
    }
    let mut rng = rng;
    let r = average(x0);
    let mut x = x0.to_vec();
    let mut rows = Vec::with_capacity(iterations + 1);
    let mut snaps = Vec::new();
    let mut stepper = Stepper::new(n);

    let record = |i: usize, x: &[f64], rows: &mut Vec<TrajectoryRow>, snaps: &mut Vec<Snapshot>| {
        let avg = average(x);
        rows.push(TrajectoryRow {
            iter: i,
            x_avg: avg,
            dist_consensus: distance_to_consensus(x),
            sq_err: (avg - r) * (avg - r),
        });
        if snapshots.wants(i, iterations) {
            snaps.push(Snapshot { iter: i, state: x.to_vec() });
        }
    };

    record(0, &x, &mut rows, &mut snaps);
    for i in 0..iterations {
        let alpha = setup.weights.alpha(i);
        stepper.advance(&mut x, alpha, i, setup.failure, setup.noise, &mut rng)?;
        record(i + 1, &x, &mut rows, &mut snaps);
    }
    Ok(TrajectoryRecord { initial_average: r, rows, snapshots: snaps, final_state: x })
}

/// Upper bound `(eta / N^2) sum alpha^2` on the mean-square error of the
/// consensus limit.
pub fn mse_bound(weights: &WeightSequence, eta: f64, n: usize) -> Result<f64> {
    if !(eta >= 0.0) {
        return Err(Error::InvalidArgument(format!("eta must be >= 0, got {eta}")));
    }
    let n = n as f64;
    Ok(eta / (n * n) * weights.sum_of_squares())
}

/// Exact mean-square error `2 M sigma^2 (1 - p) / N^2 * sum alpha^2` for a
/// uniform erasure network with i.i.d. link noise of variance `sigma2`.
pub fn erasure_mse_exact(m: usize, sigma2: f64, p: f64, n: usize, weights: &WeightSequence) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p must lie in [0, 1], got {p}")));
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::InvalidArgument(format!("sigma^2 must be >= 0, got {sigma2}")));
    }
    mse_bound(weights, 2.0 * m as f64 * sigma2 * (1.0 - p), n)
}

/// Rescales `base` so that its [`mse_bound`] equals `target`.
pub fn scale_weights_for_mse(target: f64, eta: f64, n: usize, base: &WeightSequence) -> Result<WeightSequence> {
    if !(target > 0.0) || !(eta > 0.0) {
        return Err(Error::InvalidArgument("target and eta must be > 0".into()));
    }
    let n = n as f64;
    let factor = (target * n * n / (eta * base.sum_of_squares())).sqrt();
    base.rescaled(factor)
}

/// Bound on `||E x(i) - r 1||` from the mean recursion `E x(i+1) = (I - alpha(i) Lbar) E x(i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanRateBound {
    pub bound: f64,
    /// First index with `alpha(i) <= 2 / (lambda_2 + lambda_N)`. Steps before
    /// it are bounded by their exact contraction factor instead of the
    /// exponential one.
    pub valid_from: usize,
}

impl MeanRateBound {
    /// Errors unless the weight condition holds from index 0.
    pub fn require_valid(self) -> Result<f64> {
        if self.valid_from == 0 {
            Ok(self.bound)
        } else {
            Err(Error::PreconditionViolated { index: 0 })
        }
    }
}

/// `exp(-lambda_2 sum_{j < i} alpha(j)) * initial_deviation`, with `lambda_2`
/// and `lambda_N` taken from the mean Laplacian.
pub fn mean_convergence_bound(
    iterations: usize,
    lambda2: f64,
    lambda_max: f64,
    weights: &WeightSequence,
    initial_deviation: f64,
) -> Result<MeanRateBound> {
    if !(lambda2 >= 0.0) || !(lambda_max >= lambda2) {
        return Err(Error::InvalidArgument(format!("need 0 <= lambda_2 <= lambda_N, got {lambda2}, {lambda_max}")));
    }
    if !(initial_deviation >= 0.0) {
        return Err(Error::InvalidArgument("initial deviation must be >= 0".into()));
    }
    let limit = if lambda2 + lambda_max > 0.0 { 2.0 / (lambda2 + lambda_max) } else { f64::INFINITY };
    let mut valid_from = 0;
    while weights.alpha(valid_from) > limit {
        valid_from += 1;
    }

    let head = valid_from.min(iterations);
    let mut factor = 1.0;
    for j in 0..head {
        let a = weights.alpha(j);
        factor *= (1.0 - a * lambda2).abs().max((1.0 - a * lambda_max).abs());
    }
    let exponent = -lambda2 * weights.range_sum(head, iterations);
    Ok(MeanRateBound { bound: factor * exponent.exp() * initial_deviation, valid_from })
}
