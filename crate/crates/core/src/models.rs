//! Random link-failure and channel-noise models.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::spectral::{Graph, Laplacian};

/// User-supplied topology for iteration `i` at state `x`. The returned
/// Laplacians must have a constant mean; nothing here can check that.
pub type StateLaplacianHook = Arc<dyn Fn(usize, &[f64]) -> Laplacian + Send + Sync>;

#[derive(Clone)]
pub enum FailureKind {
    /// Every edge of the base graph is live at every iteration.
    Static,
    /// Each edge fails independently with the same probability.
    Erasure(f64),
    /// Edge `e` fails independently with probability `p[e]` (edge-index order).
    PerLink(Vec<f64>),
    StateDependent(StateLaplacianHook),
}

impl fmt::Debug for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Static => f.write_str("Static"),
            Self::Erasure(p) => f.debug_tuple("Erasure").field(p).finish(),
            Self::PerLink(p) => f.debug_tuple("PerLink").field(&p.len()).finish(),
            Self::StateDependent(_) => f.write_str("StateDependent(..)"),
        }
    }
}

/// A base graph together with a rule for which of its links are live at
/// each iteration.
#[derive(Debug, Clone)]
pub struct LinkFailureModel {
    base: Graph,
    kind: FailureKind,
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("failure probability {p} outside [0, 1]")))
    }
}

impl LinkFailureModel {
    pub fn fixed(base: Graph) -> Self {
        Self { base, kind: FailureKind::Static }
    }

    pub fn erasure(base: Graph, p: f64) -> Result<Self> {
        check_probability(p)?;
        Ok(Self { base, kind: FailureKind::Erasure(p) })
    }

    pub fn per_link(base: Graph, p: Vec<f64>) -> Result<Self> {
        if p.len() != base.edge_count() {
            return Err(Error::InvalidArgument(format!("{} probabilities for {} links", p.len(), base.edge_count())));
        }
        p.iter().try_for_each(|&q| check_probability(q))?;
        Ok(Self { base, kind: FailureKind::PerLink(p) })
    }

    /// `base` only fixes the node count and documents the realizable links.
    pub fn state_dependent(base: Graph, hook: StateLaplacianHook) -> Self {
        Self { base, kind: FailureKind::StateDependent(hook) }
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn kind(&self) -> &FailureKind {
        &self.kind
    }

    pub fn is_static(&self) -> bool {
        matches!(self.kind, FailureKind::Static)
    }

    /// Probability that edge `e` is live, when the model has a closed form.
    pub fn live_probabilities(&self) -> Result<Vec<f64>> {
        let m = self.base.edge_count();
        match &self.kind {
            FailureKind::Static => Ok(vec![1.0; m]),
            FailureKind::Erasure(p) => Ok(vec![1.0 - p; m]),
            FailureKind::PerLink(p) => Ok(p.iter().map(|q| 1.0 - q).collect()),
            FailureKind::StateDependent(_) => Err(Error::UnsupportedVariant("state-dependent link model")),
        }
    }

    /// `E[L(i)] = sum_e (1 - p_e) L_e`.
    pub fn mean_laplacian(&self) -> Result<Laplacian> {
        match &self.kind {
            FailureKind::Static => Ok(Laplacian::from_graph(&self.base)),
            FailureKind::Erasure(p) => Ok(Laplacian::from_graph(&self.base).scaled(1.0 - p)),
            _ => {
                let q = self.live_probabilities()?;
                Ok(Laplacian::from_weighted_edges(
                    self.base.node_count(),
                    self.base.edges().iter().zip(q).map(|(&(a, b), w)| (a, b, w)),
                ))
            }
        }
    }

    /// Draws the live topology for iteration `iteration` at state `x`.
    pub fn sample_into(&self, iteration: usize, x: &[f64], rng: &mut RngStream, out: &mut LinkSample) {
        out.n = self.base.node_count();
        out.live.clear();
        match &self.kind {
            FailureKind::Static => {
                out.live.extend(self.base.edges().iter().map(|&(a, b)| LiveEdge { a, b, w: 1.0 }));
            }
            FailureKind::Erasure(p) => {
                let q = 1.0 - p;
                keep_edges(self.base.edges(), |_| rng.random::<f64>() < q, out);
            }
            FailureKind::PerLink(p) => {
                keep_edges(self.base.edges(), |e| rng.random::<f64>() < 1.0 - p[e], out);
            }
            FailureKind::StateDependent(hook) => {
                let l = hook(iteration, x);
                out.live.extend(l.weighted_edges().into_iter().map(|(a, b, w)| LiveEdge { a, b, w }));
            }
        }
    }

    pub fn sample(&self, iteration: usize, x: &[f64], rng: &mut RngStream) -> LinkSample {
        let mut s = LinkSample::new(self.base.node_count());
        self.sample_into(iteration, x, rng, &mut s);
        s
    }
}

/// Writes every edge and advances the cursor only past kept ones, so the
/// coin flips do not turn into unpredictable branches.
fn keep_edges(edges: &[(usize, usize)], mut keep: impl FnMut(usize) -> bool, out: &mut LinkSample) {
    out.live.resize(edges.len(), LiveEdge { a: 0, b: 0, w: 1.0 });
    let mut len = 0;
    for (e, &(a, b)) in edges.iter().enumerate() {
        out.live[len] = LiveEdge { a, b, w: 1.0 };
        len += usize::from(keep(e));
    }
    out.live.truncate(len);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiveEdge {
    pub a: usize,
    pub b: usize,
    pub w: f64,
}

/// The live subgraph drawn for one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSample {
    n: usize,
    live: Vec<LiveEdge>,
}

impl LinkSample {
    pub fn new(n: usize) -> Self {
        Self { n, live: Vec::new() }
    }

    pub fn live_edges(&self) -> &[LiveEdge] {
        &self.live
    }

    pub fn laplacian(&self) -> Laplacian {
        Laplacian::from_weighted_edges(self.n, self.live.iter().map(|e| (e.a, e.b, e.w)))
    }
}

/// Anything that can compute `L x`.
pub trait LaplacianAction {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[f64], out: &mut [f64]);
}

impl LaplacianAction for Laplacian {
    fn dim(&self) -> usize {
        Laplacian::dim(self)
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

impl LaplacianAction for LinkSample {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for e in &self.live {
            let d = e.w * (x[e.a] - x[e.b]);
            out[e.a] += d;
            out[e.b] -= d;
        }
    }
}

/// Channel noise. For the additive variants, every live link `(l, k)` carries
/// two independent zero-mean draws `v_lk`, `v_kl` (one per receiving end), and
/// sensor `l` sees `n_l = -sum_k w_lk v_lk`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    None,
    Gaussian {
        variance: f64,
    },
    /// Symmetric uniform on `[-bound, bound]`.
    Uniform {
        bound: f64,
    },
    /// `n = theta * (x + w)`, scalar `theta` and vector `w` zero-mean Gaussian.
    /// The orthogonal-component variance constants `c1`, `c2` of this model
    /// are not used by any bound here.
    MultiplicativeMarkov {
        theta_variance: f64,
        w_variance: f64,
    },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidArgument(format!("{what} must be finite and >= 0, got {v}")));
        match *self {
            Self::None => Ok(()),
            Self::Gaussian { variance } if !(variance >= 0.0 && variance.is_finite()) => bad("variance", variance),
            Self::Uniform { bound } if !(bound >= 0.0 && bound.is_finite()) => bad("bound", bound),
            Self::MultiplicativeMarkov { theta_variance, w_variance } => {
                if !(theta_variance >= 0.0 && theta_variance.is_finite()) {
                    bad("theta variance", theta_variance)
                } else if !(w_variance >= 0.0 && w_variance.is_finite()) {
                    bad("w variance", w_variance)
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Per-link variance `mu` for the additive variants.
    pub fn link_variance(&self) -> Result<f64> {
        match *self {
            Self::None => Ok(0.0),
            Self::Gaussian { variance } => Ok(variance),
            Self::Uniform { bound } => Ok(bound * bound / 3.0),
            Self::MultiplicativeMarkov { .. } => Err(Error::UnsupportedVariant("multiplicative noise")),
        }
    }

    fn link_draw(&self, rng: &mut RngStream) -> f64 {
        match *self {
            Self::Gaussian { variance } => {
                let z: f64 = StandardNormal.sample(rng);
                variance.sqrt() * z
            }
            Self::Uniform { bound } => rng.random_range(-bound..=bound),
            _ => 0.0,
        }
    }

    /// Writes the noise vector `n(i)` into `out`.
    pub fn sample_into(&self, links: &LinkSample, x: &[f64], rng: &mut RngStream, out: &mut [f64]) {
        out.fill(0.0);
        match *self {
            Self::None => {}
            Self::Gaussian { .. } | Self::Uniform { .. } => {
                for e in links.live_edges() {
                    let v_ab = self.link_draw(rng);
                    let v_ba = self.link_draw(rng);
                    out[e.a] -= e.w * v_ab;
                    out[e.b] -= e.w * v_ba;
                }
            }
            Self::MultiplicativeMarkov { theta_variance, w_variance } => {
                let z: f64 = StandardNormal.sample(rng);
                let theta = theta_variance.sqrt() * z;
                let sw = w_variance.sqrt();
                for (o, xi) in out.iter_mut().zip(x) {
                    let z: f64 = StandardNormal.sample(rng);
                    *o = theta * (xi + sw * z);
                }
            }
        }
    }

    pub fn sample(&self, links: &LinkSample, x: &[f64], rng: &mut RngStream) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.sample_into(links, x, rng, &mut out);
        out
    }
}

/// Parameters the analytical bounds consume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseStatistics {
    /// Supremum of the per-link variance.
    pub mu: f64,
    /// `E ||n(i)||^2` (exact for the independent additive variants).
    pub eta: f64,
    /// Supremum of the per-component variance `E n_l(i)^2`.
    pub phi2_max: f64,
}

/// `mu`, `eta = 2 mu sum_e (1 - p_e)` and `phi2_max = d_max mu`. The latter
/// bounds every component variance whether or not links fail.
pub fn noise_statistics(noise: &NoiseModel, failure: &LinkFailureModel) -> Result<NoiseStatistics> {
    let mu = noise.link_variance()?;
    let q = failure.live_probabilities()?;
    let eta = 2.0 * mu * q.iter().sum::<f64>();
    let phi2_max = mu * failure.base().max_degree() as f64;
    Ok(NoiseStatistics { mu, eta, phi2_max })
}
