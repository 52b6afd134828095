//! Closed-form analysis of constant-weight repeated averaging.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::Laplacian;

/// Grid resolution of the weight search on `(0, alpha_opt]`.
pub const ALPHA_GRID_POINTS: usize = 1000;
/// Relative bracket width at which golden-section refinement stops.
pub const ALPHA_REL_TOL: f64 = 1e-6;

/// Accuracy target and network constants shared by the averaging-time formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AveragingParams {
    pub eps: f64,
    pub delta: f64,
    /// Radius `K` of the ball of admissible initial deviations.
    pub k_radius: f64,
    pub phi2_max: f64,
    pub n: usize,
}

impl AveragingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidArgument(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.k_radius > 0.0 && self.k_radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("K must be > 0, got {}", self.k_radius)));
        }
        if !(self.phi2_max >= 0.0 && self.phi2_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("phi2_max must be >= 0, got {}", self.phi2_max)));
        }
        if self.n == 0 {
            return Err(Error::InvalidArgument("N must be positive".into()));
        }
        Ok(())
    }

    pub fn with_eps(self, eps: f64) -> Self {
        Self { eps, ..self }
    }

    pub fn with_phi2_max(self, phi2_max: f64) -> Self {
        Self { phi2_max, ..self }
    }
}

/// `rho(I - alpha L - J/N)` from the extreme nonzero eigenvalues.
pub fn gamma2_from_spectrum(lambda2: f64, lambda_max: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !(alpha * lambda_max < 2.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha = {alpha} outside (0, 2/lambda_N) with lambda_N = {lambda_max}"
        )));
    }
    Ok((1.0 - alpha * lambda2).abs().max((1.0 - alpha * lambda_max).abs()))
}

/// Spectral radius of the disagreement operator `I - alpha L - J/N`.
pub fn gamma2(laplacian: &Laplacian, alpha: f64) -> Result<f64> {
    gamma2_from_spectrum(laplacian.algebraic_connectivity()?, laplacian.spectral_radius()?, alpha)
}

/// `(gamma_2^i K, alpha^2 phi2_max [i/N + (1 - gamma_2^{2i}) / (1 - gamma_2^2) (1 - 1/N)])`:
/// bounds on the bias and on the variance of one pass's final state.
pub fn error_moment_bounds(
    alpha: f64,
    iterations: usize,
    k_radius: f64,
    gamma2: f64,
    phi2_max: f64,
    n: usize,
) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&gamma2) {
        return Err(Error::Unbounded { gamma2 });
    }
    let i = iterations as f64;
    let nf = n as f64;
    let g2 = gamma2 * gamma2;
    let mean = gamma2.powf(i) * k_radius;
    let geometric = (1.0 - g2.powf(i)) / (1.0 - g2);
    let var = alpha * alpha * phi2_max * (i / nf + geometric * (1.0 - 1.0 / nf));
    Ok((mean, var))
}

/// The approximate averaging time (upper bound on `T^alpha(eps, delta)`),
/// evaluated term for term as
/// `(ln(eps/2)/ln g + 1) * [ (4 alpha^2 phi2 ln(2/delta) / (K eps))
///   * (ln(eps/2)/(N ln g) + 1/N + (1 - g^2 eps^2/4)/(1 - g^2) (1 - 1/N)) + 1 ]`.
pub fn approx_averaging_time(gamma2: f64, alpha: f64, params: &AveragingParams) -> Result<f64> {
    params.validate()?;
    if !(0.0..1.0).contains(&gamma2) {
        return Err(Error::Unbounded { gamma2 });
    }
    let AveragingParams { eps, delta, k_radius, phi2_max, n } = *params;
    let nf = n as f64;
    let ln_g = gamma2.ln();
    let ln_half_eps = (eps / 2.0).ln();
    let h = ln_half_eps / ln_g + 1.0;
    let noise = 4.0 * alpha * alpha * phi2_max * (2.0 / delta).ln() / (k_radius * eps);
    let g2 = gamma2 * gamma2;
    let bracket = ln_half_eps / (nf * ln_g) + 1.0 / nf + (1.0 - g2 * eps * eps / 4.0) / (1.0 - g2) * (1.0 - 1.0 / nf);
    Ok(h * (noise * bracket + 1.0))
}

/// Minimiser of the approximate averaging time over `alpha in (0, alpha_opt]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaOptimum {
    pub alpha_star: f64,
    pub t_hat_star: f64,
    pub gamma2: f64,
    /// `2 / (lambda_2 + lambda_N)`.
    pub alpha_opt: f64,
}

/// Grid search with golden-section refinement. On `(0, alpha_opt]`,
/// `gamma_2 = 1 - alpha lambda_2`.
pub fn optimize_alpha(lambda2: f64, lambda_max: f64, params: &AveragingParams) -> Result<AlphaOptimum> {
    params.validate()?;
    let tol = crate::spectral::laplacian::CONNECTIVITY_TOL * lambda_max.max(1.0);
    if !(lambda2 > tol) {
        return Err(Error::Disconnected { lambda2 });
    }
    let alpha_opt = 2.0 / (lambda2 + lambda_max);
    let t_hat = |a: f64| approx_averaging_time((1.0 - a * lambda2).max(0.0), a, params);

    let step = alpha_opt / ALPHA_GRID_POINTS as f64;
    let mut best_k = ALPHA_GRID_POINTS;
    let mut best = t_hat(alpha_opt)?;
    for k in 1..ALPHA_GRID_POINTS {
        let v = t_hat(step * k as f64)?;
        // Strict comparison: among equal values the smaller alpha wins.
        if v < best || (v == best && k < best_k) {
            best = v;
            best_k = k;
        }
    }
    let mut alpha_star = if best_k == ALPHA_GRID_POINTS { alpha_opt } else { step * best_k as f64 };

    let lo = step * (best_k - 1) as f64;
    let hi = (step * (best_k + 1) as f64).min(alpha_opt);
    let refined = golden_section(lo.max(step * 1e-3), hi, |a| t_hat(a).unwrap_or(f64::INFINITY));
    let refined_value = t_hat(refined)?;
    if refined_value < best {
        best = refined_value;
        alpha_star = refined;
    }
    Ok(AlphaOptimum { alpha_star, t_hat_star: best, gamma2: 1.0 - alpha_star * lambda2, alpha_opt })
}

fn golden_section(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > ALPHA_REL_TOL * hi {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// Suggested iterations per pass and pass count for a chosen weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationPlan {
    pub i_star: f64,
    pub p_star: f64,
    pub i_ceil: usize,
    pub p_ceil: usize,
}

/// `i* = ln(eps/2)/ln(1 - alpha lambda_2) + 1` and
/// `p* = (4 alpha^2 phi2 ln(2/delta)/(K eps)) (i*/N + (1 - g^2 eps^2/4)/(1 - g^2)(1 - 1/N)) + 1`
/// with `g = 1 - alpha lambda_2`. Their product is the approximate averaging time.
pub fn recommended_iterations(alpha: f64, lambda2: f64, params: &AveragingParams) -> Result<IterationPlan> {
    params.validate()?;
    let g = 1.0 - alpha * lambda2;
    if !(alpha > 0.0) || !(0.0..1.0).contains(&g) {
        return Err(Error::InvalidArgument(format!(
            "alpha = {alpha} outside (0, 1/lambda_2] for lambda_2 = {lambda2}"
        )));
    }
    let AveragingParams { eps, delta, k_radius, phi2_max, n } = *params;
    let nf = n as f64;
    let i_star = (eps / 2.0).ln() / g.ln() + 1.0;
    let g2 = g * g;
    let p_star = 4.0 * alpha * alpha * phi2_max * (2.0 / delta).ln() / (k_radius * eps)
        * (i_star / nf + (1.0 - g2 * eps * eps / 4.0) / (1.0 - g2) * (1.0 - 1.0 / nf))
        + 1.0;
    Ok(IterationPlan { i_star, p_star, i_ceil: i_star.ceil() as usize, p_ceil: p_star.ceil() as usize })
}

/// `ceil((2 v / (K eps)) ln(2/delta))` passes, for a per-pass variance `v`.
pub fn chernoff_pass_count(v: f64, k_radius: f64, eps: f64, delta: f64) -> Result<u64> {
    if !(v >= 0.0) || !(k_radius > 0.0) || !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument("need v >= 0, K > 0, eps > 0, 0 < delta < 1".into()));
    }
    Ok((2.0 * v / (k_radius * eps) * (2.0 / delta).ln()).ceil() as u64)
}
