//! Averaging-time summaries and the `eps` sweep table.

use std::io::Write;

use serde::Serialize;

use super::bounds::{
    approx_averaging_time, gamma2_from_spectrum, optimize_alpha, recommended_iterations, AveragingParams,
};
use super::empirical::EmpiricalTime;
use crate::error::Result;

pub const SWEEP_CSV_HEADER: &str = "eps,alpha_star,gamma2,That_star,i_star,p_star,T_emp,ratio";

/// Approximate averaging time at a user-chosen weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbedWeight {
    pub alpha: f64,
    pub gamma2: f64,
    pub t_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragingTimeReport {
    pub eps: f64,
    pub delta: f64,
    #[serde(rename = "K")]
    pub k_radius: f64,
    pub phi2_max: f64,
    pub n: usize,
    pub lambda2: f64,
    pub lambda_max: f64,
    pub alpha_opt: f64,
    pub alpha_star: f64,
    pub gamma2: f64,
    pub t_hat_star: f64,
    pub t_hat_alpha: Option<ProbedWeight>,
    pub i_star: f64,
    pub p_star: f64,
    pub i_ceil: usize,
    pub p_ceil: usize,
    pub empirical: Option<EmpiricalTime>,
}

impl AveragingTimeReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// `That_star / T_emp` when an empirical time was found.
    pub fn ratio(&self) -> Option<f64> {
        self.empirical.as_ref().and_then(|e| e.t()).map(|t| self.t_hat_star / t as f64)
    }
}

pub fn averaging_time_report(
    lambda2: f64,
    lambda_max: f64,
    params: &AveragingParams,
    probe: Option<f64>,
) -> Result<AveragingTimeReport> {
    let opt = optimize_alpha(lambda2, lambda_max, params)?;
    let plan = recommended_iterations(opt.alpha_star, lambda2, params)?;
    let t_hat_alpha = probe
        .map(|alpha| -> Result<ProbedWeight> {
            let gamma2 = gamma2_from_spectrum(lambda2, lambda_max, alpha)?;
            Ok(ProbedWeight { alpha, gamma2, t_hat: approx_averaging_time(gamma2, alpha, params)? })
        })
        .transpose()?;
    Ok(AveragingTimeReport {
        eps: params.eps,
        delta: params.delta,
        k_radius: params.k_radius,
        phi2_max: params.phi2_max,
        n: params.n,
        lambda2,
        lambda_max,
        alpha_opt: opt.alpha_opt,
        alpha_star: opt.alpha_star,
        gamma2: opt.gamma2,
        t_hat_star: opt.t_hat_star,
        t_hat_alpha,
        i_star: plan.i_star,
        p_star: plan.p_star,
        i_ceil: plan.i_ceil,
        p_ceil: plan.p_ceil,
        empirical: None,
    })
}

/// One row per report; `T_emp` and `ratio` are left empty when unavailable.
pub fn write_sweep_csv<W: Write>(mut out: W, reports: &[AveragingTimeReport]) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for r in reports {
        let t_emp = r.empirical.as_ref().and_then(|e| e.t()).map(|t| t.to_string()).unwrap_or_default();
        let ratio = r.ratio().map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.eps, r.alpha_star, r.gamma2, r.t_hat_star, r.i_star, r.p_star, t_emp, ratio
        )?;
    }
    Ok(())
}
