//! The update `x <- x - alpha (L(i) x + n(i))` shared by both algorithms.

use crate::error::{Error, Result};
use crate::models::{LaplacianAction, LinkFailureModel, LinkSample, NoiseModel};
use crate::rng::RngStream;

/// States beyond this magnitude are reported as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// One consensus step on explicit inputs: returns `x - alpha (L x + n)`.
pub fn consensus_step<L: LaplacianAction + ?Sized>(x: &[f64], alpha: f64, laplacian: &L, noise: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), laplacian.dim(), "state and Laplacian dimensions differ");
    assert_eq!(x.len(), noise.len(), "state and noise dimensions differ");
    let mut lx = vec![0.0; x.len()];
    laplacian.apply_into(x, &mut lx);
    x.iter().zip(lx).zip(noise).map(|((xi, li), ni)| xi - alpha * (li + ni)).collect()
}

/// Reusable buffers for stepping a state in place.
#[derive(Debug, Clone)]
pub(crate) struct Stepper {
    links: LinkSample,
    noise: Vec<f64>,
    lx: Vec<f64>,
}

impl Stepper {
    pub(crate) fn new(n: usize) -> Self {
        Self { links: LinkSample::new(n), noise: vec![0.0; n], lx: vec![0.0; n] }
    }

    /// Advances `x` from iteration `iteration` to `iteration + 1`.
    pub(crate) fn advance(
        &mut self,
        x: &mut [f64],
        alpha: f64,
        iteration: usize,
        failure: &LinkFailureModel,
        noise: &NoiseModel,
        rng: &mut RngStream,
    ) -> Result<()> {
        rng.begin_iteration(iteration as u64);
        failure.sample_into(iteration, x, rng, &mut self.links);
        noise.sample_into(&self.links, x, rng, &mut self.noise);
        self.links.apply_into(x, &mut self.lx);
        let mut bad = false;
        for ((xi, li), ni) in x.iter_mut().zip(&self.lx).zip(&self.noise) {
            *xi -= alpha * (li + ni);
            bad |= !(xi.abs() <= DIVERGENCE_LIMIT);
        }
        if bad {
            return Err(Error::Diverged { iteration: iteration + 1 });
        }
        Ok(())
    }
}
