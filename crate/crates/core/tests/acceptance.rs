//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. `ACCEPTANCE_ONLY=1,5` restricts the run.

use std::process::ExitCode;
use std::time::Instant;

use consensus_lab::anc::{
    approx_averaging_time, averaging_time_report, empirical_averaging_time, error_moment_bounds, gamma2,
    optimize_alpha, recommended_iterations, run_anc, run_anc_passes, sample_on_sphere, AncConfig, AveragingParams,
    EmpiricalSetup, PassGrid,
};
use consensus_lab::and::{erasure_mse_exact, mean_convergence_bound, run_and, AndSetup, Snapshots, WeightSequence};
use consensus_lab::models::{noise_statistics, LinkFailureModel, NoiseModel};
use consensus_lab::montecarlo::{mean_and_variance, par_map, with_workers};
use consensus_lab::spectral::{average, distance_to_consensus, erdos_renyi, jacobi, random_regular, Laplacian};
use consensus_lab::{Result, RngStream};
use rand::Rng;

const MASTER_SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

/// The A-ND study network: N=100, M=500 Erdos-Renyi, erasure p=0.4.
fn and_network() -> LinkFailureModel {
    LinkFailureModel::erasure(erdos_renyi(100, 500, 2).unwrap(), 0.4).unwrap()
}

fn and_initial_state() -> Vec<f64> {
    let mut rng = RngStream::new(MASTER_SEED, u64::MAX);
    (0..100).map(|_| rng.random_range(0.0..30.0)).collect()
}

fn c1_erasure_mse() -> Result<Outcome> {
    let failure = and_network();
    let noise = NoiseModel::Gaussian { variance: 30.0 };
    let w = WeightSequence::harmonic(0.2)?;
    let zeta = erasure_mse_exact(500, 30.0, 0.4, 100, &w)?;
    let x0 = and_initial_state();
    let runs = 500;
    let root = RngStream::new(MASTER_SEED, 1);
    let errs: Vec<f64> = par_map(runs, |k| {
        run_and(
            &x0,
            AndSetup { weights: &w, failure: &failure, noise: &noise },
            100_000,
            root.fork(k as u64),
            &Snapshots::None,
        )
        .map(|rec| rec.final_row().sq_err)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let (mean, var) = mean_and_variance(&errs);
    let se = (var / runs as f64).sqrt();
    let rel = (mean - zeta).abs() / zeta;
    outcome(
        rel <= 0.15,
        format!(
            "zeta = {zeta:.5}, empirical {mean:.5} +- {se:.5} over {runs} runs, relative error {:.1}% (limit 15%)",
            100.0 * rel
        ),
    )
}

struct AndBatch {
    dist_ratio: Vec<f64>,
    final_avg: Vec<f64>,
    checkpoints: Vec<(usize, Vec<Vec<f64>>)>,
    r: f64,
    x0: Vec<f64>,
}

const CHECKPOINTS: [usize; 3] = [10, 100, 1000];

fn and_batch() -> Result<AndBatch> {
    let failure = and_network();
    let noise = NoiseModel::Gaussian { variance: 30.0 };
    let w = WeightSequence::new(1.0, 1.0, 20.0)?;
    let x0 = and_initial_state();
    let root = RngStream::new(MASTER_SEED, 2);
    let snaps = Snapshots::At(CHECKPOINTS.to_vec());
    let recs = par_map(200, |k| {
        run_and(&x0, AndSetup { weights: &w, failure: &failure, noise: &noise }, 10_000, root.fork(k as u64), &snaps)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(AndBatch {
        dist_ratio: recs.iter().map(|r| r.final_row().dist_consensus / r.rows[0].dist_consensus).collect(),
        final_avg: recs.iter().map(|r| r.final_row().x_avg).collect(),
        checkpoints: CHECKPOINTS
            .iter()
            .map(|&i| (i, recs.iter().map(|r| r.snapshot_at(i).unwrap().to_vec()).collect()))
            .collect(),
        r: average(&x0),
        x0,
    })
}

fn c2_consensus(batch: &AndBatch) -> Result<Outcome> {
    let first: Vec<f64> = batch.dist_ratio[..100].to_vec();
    let ok = first.iter().filter(|&&q| q < 0.01).count();
    let worst = first.iter().cloned().fold(0.0, f64::max);
    outcome(ok >= 95, format!("{ok}/100 runs below 1% of the initial distance at i = 10^4 (worst ratio {worst:.5})"))
}

fn c3_unbiased(batch: &AndBatch) -> Result<Outcome> {
    let (mean, var) = mean_and_variance(&batch.final_avg);
    let se = (var / batch.final_avg.len() as f64).sqrt();
    let z = (mean - batch.r) / se;
    outcome(
        z.abs() <= 4.0,
        format!("grand mean {mean:.5}, r = {:.5}, se {se:.5}, |z| = {:.2} (limit 4)", batch.r, z.abs()),
    )
}

fn c4_mean_rate(batch: &AndBatch) -> Result<Outcome> {
    let mean = and_network().mean_laplacian()?;
    let (l2, ln) = (mean.algebraic_connectivity()?, mean.spectral_radius()?);
    let w = WeightSequence::new(1.0, 1.0, 20.0)?;
    let dev = distance_to_consensus(&batch.x0);
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, states) in &batch.checkpoints {
        let runs = states.len() as f64;
        let mut gap_sq = 0.0;
        let mut se_sq = 0.0;
        for node in 0..batch.x0.len() {
            let col: Vec<f64> = states.iter().map(|s| s[node]).collect();
            let (m, v) = mean_and_variance(&col);
            gap_sq += (m - batch.r).powi(2);
            se_sq += v / runs;
        }
        let bound = mean_convergence_bound(*i, l2, ln, &w, dev)?.require_valid()?;
        let (gap, slack) = (gap_sq.sqrt(), 3.0 * se_sq.sqrt());
        pass &= gap <= bound + slack;
        parts.push(format!("i={i}: {gap:.4} <= {bound:.4} + {slack:.4}"));
    }
    outcome(pass, parts.join("; "))
}

fn c5_moment_bounds() -> Result<Outcome> {
    let graph = random_regular(230, 6, 1)?;
    let l = Laplacian::from_graph(&graph);
    let failure = LinkFailureModel::fixed(graph);
    let noise = NoiseModel::Gaussian { variance: 100.0 };
    let phi2 = noise_statistics(&noise, &failure)?.phi2_max;
    let k = 50.0;
    let x0 = sample_on_sphere(230, k, &mut RngStream::new(MASTER_SEED, 5));
    let mut pass = phi2 == 600.0;
    let mut parts = vec![format!("phi2_max = {phi2}")];
    let alpha = 0.02;
    let g2 = gamma2(&l, alpha)?;
    {
        for iterations in [10, 50] {
            let config = AncConfig { alpha, iterations, passes: 10_000, k_radius: k, eps: 0.1, delta: 0.05 };
            let finals =
                run_anc_passes(&x0, &config, &failure, &noise, &RngStream::new(MASTER_SEED, 50 + iterations as u64))?;
            let (mean_bound, var_bound) = error_moment_bounds(alpha, iterations, k, g2, phi2, 230)?;
            let (mut worst_mean, mut worst_var) = (0.0f64, 0.0f64);
            for s in 0..230 {
                let (m, v) = mean_and_variance(&finals.iter().map(|f| f[s]).collect::<Vec<_>>());
                worst_mean = worst_mean.max(m.abs());
                worst_var = worst_var.max(v);
            }
            pass &= worst_mean <= mean_bound && worst_var <= var_bound;
            parts.push(format!(
                "alpha={alpha:.4} i={iterations}: |mean| {worst_mean:.3e} <= {mean_bound:.3e}, var {worst_var:.4} <= {var_bound:.4}"
            ));
        }
    }
    outcome(pass, parts.join("; "))
}

fn c6_tightness() -> Result<Outcome> {
    let graph = erdos_renyi(100, 500, 2)?;
    let l = Laplacian::from_graph(&graph);
    let (l2, ln) = (l.algebraic_connectivity()?, l.spectral_radius()?);
    let d_max = graph.max_degree() as f64;
    let failure = LinkFailureModel::fixed(graph);
    let noise = NoiseModel::Gaussian { variance: 80.0 / d_max };
    let phi2 = noise_statistics(&noise, &failure)?.phi2_max;
    let eps = vec![0.05, 0.1, 0.2, 0.4];
    let base = AveragingParams { eps: eps[0], delta: 0.05, k_radius: 50.0, phi2_max: phi2, n: 100 };
    let reports =
        eps.iter().map(|&e| averaging_time_report(l2, ln, &base.with_eps(e), None)).collect::<Result<Vec<_>>>()?;
    let bullet = 2.0 / (l2 + ln);
    let mut alphas: Vec<f64> = reports.iter().map(|r| r.alpha_star).collect();
    alphas.extend([0.25, 0.5, 0.75, 1.0].map(|f| f * bullet));
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let setup = EmpiricalSetup {
        failure: &failure,
        noise: &noise,
        eps: eps.clone(),
        delta: 0.05,
        k_radius: 50.0,
        alphas,
        x0_samples: 10,
        runs_per_x0: 100,
        grid: PassGrid::Recommended { points: 25, factor: 3.0 },
        confidence: 0.95,
    };
    let times = empirical_averaging_time(&setup, &RngStream::new(MASTER_SEED, 6))?;
    let mut pass = (phi2 - 80.0).abs() < 1e-9;
    let mut parts = Vec::new();
    for (r, t) in reports.iter().zip(&times) {
        match t.achieved {
            Some(p) => {
                let ok = p.t as f64 <= r.t_hat_star;
                pass &= ok;
                parts.push(format!(
                    "eps={}: T*={} (i={}, p={}, alpha={:.4}) <= That*={:.1}, ratio That*/T* = {:.2}",
                    r.eps,
                    p.t,
                    p.iterations,
                    p.passes,
                    p.alpha,
                    r.t_hat_star,
                    r.t_hat_star / p.t as f64
                ));
            }
            None => {
                pass = false;
                parts.push(format!("eps={}: not achieved within grid (best fraction {:.3})", r.eps, t.best_fraction));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

fn regular_spectrum() -> Result<(f64, f64)> {
    let l = Laplacian::from_graph(&random_regular(230, 6, 1)?);
    Ok((l.algebraic_connectivity()?, l.spectral_radius()?))
}

fn eps_sweep() -> Vec<f64> {
    (0..10).map(|k| 0.02 + 0.48 * k as f64 / 9.0).collect()
}

fn c7_optimizer_curves() -> Result<Outcome> {
    let (l2, ln) = regular_spectrum()?;
    let bullet = 2.0 / (l2 + ln);
    let sweep = eps_sweep()
        .into_iter()
        .map(|eps| {
            optimize_alpha(l2, ln, &AveragingParams { eps, delta: 0.05, k_radius: 50.0, phi2_max: 100.0, n: 230 })
        })
        .collect::<Result<Vec<_>>>()?;
    let alpha_up = sweep.windows(2).all(|w| w[1].alpha_star >= w[0].alpha_star * (1.0 - 1e-6));
    let t_down = sweep.windows(2).all(|w| w[1].t_hat_star <= w[0].t_hat_star);
    let saturated = sweep.iter().all(|o| o.alpha_star <= bullet) && sweep.last().unwrap().alpha_star == bullet;
    let alphas: Vec<String> = sweep.iter().map(|o| format!("{:.4}", o.alpha_star)).collect();
    outcome(
        alpha_up && t_down && saturated,
        format!(
            "alpha* = [{}], alpha_bullet = {bullet:.4}; alpha* nondecreasing {alpha_up}, That* nonincreasing {t_down}, saturates {saturated}",
            alphas.join(", ")
        ),
    )
}

fn c8_tradeoff() -> Result<Outcome> {
    let (l2, ln) = regular_spectrum()?;
    let mut increasing = true;
    let mut worst_gap = 0.0f64;
    for eps in eps_sweep() {
        let mut last = 0.0;
        for phi2 in [10.0, 30.0, 100.0] {
            let p = AveragingParams { eps, delta: 0.05, k_radius: 50.0, phi2_max: phi2, n: 230 };
            let opt = optimize_alpha(l2, ln, &p)?;
            let plan = recommended_iterations(opt.alpha_star, l2, &p)?;
            increasing &= plan.p_star > last;
            last = plan.p_star;
            worst_gap = worst_gap.max((plan.i_star * plan.p_star - opt.t_hat_star).abs());
        }
    }
    outcome(
        increasing && worst_gap <= 2.0,
        format!("p* strictly increasing in phi2: {increasing}; max |i* p* - That*| = {worst_gap:.2e} (limit 2)"),
    )
}

fn c9_properties() -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };

    // Laplacian algebra on random graphs.
    let mut algebra = true;
    for seed in 0..30 {
        let g = erdos_renyi(40, 80, seed)?;
        let l = Laplacian::from_graph(&g);
        let ev = l.eigenvalues()?;
        algebra &= (0..40).all(|i| l.row(i).iter().sum::<f64>() == 0.0 && (0..40).all(|j| l.get(i, j) == l.get(j, i)));
        algebra &= ev.windows(2).all(|w| w[0] <= w[1]) && ev[0].abs() <= 1e-8 && ev.iter().all(|v| v.abs() <= 80.0);
        algebra &= l.zero_eigenvalue_count()? == g.component_count();
    }
    check("Laplacian algebra", algebra);

    // Martingale average and noiseless conservation.
    let failure = LinkFailureModel::erasure(erdos_renyi(40, 120, 1)?, 0.3)?;
    let x: Vec<f64> = (0..40).map(|i| (i % 9) as f64).collect();
    let noise = NoiseModel::Gaussian { variance: 2.0 };
    let mut rng = RngStream::new(MASTER_SEED, 9);
    let diffs: Vec<f64> = (0..10_000u64)
        .map(|i| {
            rng.begin_iteration(i);
            let links = failure.sample(i as usize, &x, &mut rng);
            let n = noise.sample(&links, &x, &mut rng);
            average(&consensus_lab::and::and_step(&x, 0.05, &links, &n)) - average(&x)
        })
        .collect();
    let (m, v) = mean_and_variance(&diffs);
    check("martingale average", m.abs() <= 4.0 * (v / 1e4).sqrt());
    let w = WeightSequence::harmonic(0.2)?;
    let rec = run_and(
        &x,
        AndSetup { weights: &w, failure: &failure, noise: &NoiseModel::None },
        2000,
        RngStream::new(MASTER_SEED, 10),
        &Snapshots::None,
    )?;
    check(
        "noiseless conservation",
        rec.rows.iter().all(|row| (row.x_avg - rec.initial_average).abs() <= 1e-12 * rec.initial_average.abs()),
    );

    // gamma_2 against a dense eigensolve of I - alpha L - J/N.
    let l = Laplacian::from_graph(&random_regular(40, 4, 2)?);
    let ln = l.spectral_radius()?;
    let mut agree = true;
    for k in 1..10 {
        let alpha = k as f64 / 10.0 * 2.0 / ln;
        let mut dense = vec![0.0; 1600];
        for i in 0..40 {
            for j in 0..40 {
                dense[i * 40 + j] = f64::from(u8::from(i == j)) - alpha * l.get(i, j) - 1.0 / 40.0;
            }
        }
        let rho = jacobi::eigenvalues(&dense, 40)?.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        agree &= (gamma2(&l, alpha)? - rho).abs() < 1e-10;
    }
    check("gamma_2 formula", agree);

    // That increasing in gamma_2.
    let p = AveragingParams { eps: 0.1, delta: 0.05, k_radius: 50.0, phi2_max: 100.0, n: 230 };
    let ts = (1..=100).map(|j| approx_averaging_time(j as f64 / 101.0, 0.1, &p)).collect::<Result<Vec<_>>>()?;
    check("That monotone in gamma_2", ts.windows(2).all(|w| w[0] < w[1]));

    // Bitwise reproducibility under 1/4/8 workers.
    let fixed = LinkFailureModel::fixed(random_regular(40, 4, 2)?);
    let config = AncConfig { alpha: 0.1, iterations: 30, passes: 24, k_radius: 1.0, eps: 0.1, delta: 0.05 };
    let run = || {
        run_anc(&x, &config, &fixed, &noise, &RngStream::new(MASTER_SEED, 11))
            .map(|v| v.iter().map(|e| e.to_bits()).collect::<Vec<_>>())
    };
    let one = with_workers(1, run)?;
    check("bitwise reproducibility", one == with_workers(4, run)? && one == with_workers(8, run)?);

    let detail = if failures.is_empty() {
        "Laplacian algebra, martingale average, noiseless conservation, gamma_2 formula, That monotonicity, 1/4/8-worker reproducibility".to_string()
    } else {
        format!("failed: {}", failures.join(", "))
    };
    outcome(failures.is_empty(), detail)
}

fn main() -> ExitCode {
    let only: Option<Vec<usize>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let wanted = |id: usize| only.as_ref().is_none_or(|o| o.contains(&id));

    let mut all_pass = true;
    let mut report = |id: usize, name: &str, f: &dyn Fn() -> Result<Outcome>| {
        if !wanted(id) {
            return;
        }
        let start = Instant::now();
        let (pass, detail) = match f() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        all_pass &= pass;
        println!(
            "[{}] criterion {id}: {name} -- {detail} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    };

    report(1, "erasure MSE matches the closed form", &c1_erasure_mse);
    if [2, 3, 4].into_iter().any(wanted) {
        match and_batch() {
            Ok(batch) => {
                report(2, "A-ND reaches consensus", &|| c2_consensus(&batch));
                report(3, "A-ND limit is unbiased", &|| c3_unbiased(&batch));
                report(4, "mean state obeys the rate bound", &|| c4_mean_rate(&batch));
            }
            Err(e) => {
                for (id, name) in [
                    (2, "A-ND reaches consensus"),
                    (3, "A-ND limit is unbiased"),
                    (4, "mean state obeys the rate bound"),
                ] {
                    report(id, name, &|| Err(e.clone()));
                }
            }
        }
    }
    report(5, "A-NC moment bounds", &c5_moment_bounds);
    report(6, "empirical averaging time below the bound", &c6_tightness);
    report(7, "optimal weight curves", &c7_optimizer_curves);
    report(8, "iteration/pass tradeoff", &c8_tradeoff);
    report(9, "property suites", &c9_properties);

    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
