use consensus_lab::and::{
    and_step, erasure_mse_exact, mean_convergence_bound, mse_bound, run_and, scale_weights_for_mse, AndSetup,
    Snapshots, WeightSequence,
};
use consensus_lab::models::{LinkFailureModel, NoiseModel};
use consensus_lab::montecarlo::mean_and_variance;
use consensus_lab::spectral::{average, erdos_renyi, Graph, Laplacian};
use consensus_lab::{Error, RngStream};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn uniform_state(n: usize, high: f64, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, 0);
    (0..n).map(|_| rng.random_range(0.0..high)).collect()
}

#[test]
fn step_matches_scalar_form() {
    let mut rng = RngStream::new(1, 0);
    for trial in 0..20 {
        let g = erdos_renyi(5, 6, trial).unwrap();
        let l = Laplacian::from_graph(&g);
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(-5.0..5.0)).collect();
        let alpha = rng.random_range(0.01..0.3);
        // v[n][l]: noise on the copy of x_l received by n.
        let mut v = [[0.0; 5]; 5];
        let mut nvec = [0.0; 5];
        for &(a, b) in g.edges() {
            v[a][b] = StandardNormal.sample(&mut rng);
            v[b][a] = StandardNormal.sample(&mut rng);
            nvec[a] -= v[a][b];
            nvec[b] -= v[b][a];
        }
        let adj = g.adjacency();
        let deg = g.degrees();
        let got = and_step(&x, alpha, &l, &nvec);
        for node in 0..5 {
            let incoming: f64 = adj[node].iter().map(|&k| x[k] + v[node][k]).sum();
            let expect = x[node] - alpha * (deg[node] as f64 * x[node] - incoming);
            assert!((got[node] - expect).abs() < 1e-12);
        }
    }
}

#[test]
fn consensus_is_a_fixed_point() {
    let l = Laplacian::from_graph(&erdos_renyi(20, 60, 3).unwrap());
    for c in [-3.5, 0.0, 1e6] {
        let x = vec![c; 20];
        assert_eq!(and_step(&x, 0.37, &l, &[0.0; 20]), x);
    }
}

#[test]
fn average_is_a_martingale() {
    let g = erdos_renyi(50, 200, 9).unwrap();
    let failure = LinkFailureModel::erasure(g, 0.3).unwrap();
    let x = uniform_state(50, 10.0, 4);
    let variants = [
        NoiseModel::Gaussian { variance: 5.0 },
        NoiseModel::Uniform { bound: 3.0 },
        NoiseModel::MultiplicativeMarkov { theta_variance: 0.2, w_variance: 1.0 },
    ];
    for (k, noise) in variants.into_iter().enumerate() {
        let mut rng = RngStream::new(70 + k as u64, 0);
        let before = average(&x);
        let diffs: Vec<f64> = (0..10_000)
            .map(|i| {
                rng.begin_iteration(i);
                let links = failure.sample(i as usize, &x, &mut rng);
                let n = noise.sample(&links, &x, &mut rng);
                average(&and_step(&x, 0.05, &links, &n)) - before
            })
            .collect();
        let (mean, var) = mean_and_variance(&diffs);
        let se = (var / diffs.len() as f64).sqrt();
        assert!(mean.abs() <= 4.0 * se, "{noise:?}: {mean} vs se {se}");
    }
}

#[test]
fn noiseless_runs_conserve_the_average() {
    let g = erdos_renyi(60, 200, 5).unwrap();
    let x0 = uniform_state(60, 30.0, 8);
    let w = WeightSequence::new(0.3, 0.8, 10.0).unwrap();
    for failure in [LinkFailureModel::fixed(g.clone()), LinkFailureModel::erasure(g.clone(), 0.5).unwrap()] {
        let rec = run_and(
            &x0,
            AndSetup { weights: &w, failure: &failure, noise: &NoiseModel::None },
            2000,
            RngStream::new(3, 1),
            &Snapshots::None,
        )
        .unwrap();
        let r = rec.initial_average;
        assert!(rec.rows.iter().all(|row| (row.x_avg - r).abs() <= 1e-12 * r.abs()));
    }
}

#[test]
fn noiseless_static_run_reaches_consensus() {
    let g = erdos_renyi(30, 80, 2).unwrap();
    assert!(g.is_connected());
    let failure = LinkFailureModel::fixed(g);
    let w = WeightSequence::new(0.25, 0.6, 1.0).unwrap();
    let rec = run_and(
        &uniform_state(30, 30.0, 1),
        AndSetup { weights: &w, failure: &failure, noise: &NoiseModel::None },
        1000,
        RngStream::new(0, 0),
        &Snapshots::None,
    )
    .unwrap();
    assert!(rec.final_row().dist_consensus < 1e-3 * rec.rows[0].dist_consensus);
}

#[test]
fn snapshots_agree_with_rows() {
    let g = erdos_renyi(40, 120, 6).unwrap();
    let failure = LinkFailureModel::erasure(g, 0.4).unwrap();
    let w = WeightSequence::harmonic(0.2).unwrap();
    let noise = NoiseModel::Gaussian { variance: 2.0 };
    let rec = run_and(
        &uniform_state(40, 30.0, 2),
        AndSetup { weights: &w, failure: &failure, noise: &noise },
        500,
        RngStream::new(4, 0),
        &Snapshots::Every(50),
    )
    .unwrap();
    assert_eq!(rec.snapshots.len(), 11);
    for s in &rec.snapshots {
        let row = rec.rows[s.iter];
        assert_eq!(row.iter, s.iter);
        assert!((average(&s.state) - row.x_avg).abs() <= 1e-12 * row.x_avg.abs().max(1.0));
    }
    assert_eq!(rec.snapshot_at(500).unwrap(), rec.final_state.as_slice());

    let mut csv = Vec::new();
    rec.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("iter,x_avg,dist_consensus,sq_err\n0,"));
    assert_eq!(text.lines().count(), 502);
    let mut snaps = Vec::new();
    rec.write_snapshots_csv(&mut snaps).unwrap();
    assert_eq!(String::from_utf8(snaps).unwrap().lines().count(), 1 + 11 * 40);
}

#[test]
fn sensor_paths_study_converges() {
    // N=100, M=500, p=0.4, sigma^2=15, alpha(i) = 1/(4(i+1)).
    let failure = LinkFailureModel::erasure(erdos_renyi(100, 500, 2).unwrap(), 0.4).unwrap();
    let w = WeightSequence::harmonic(0.25).unwrap();
    let rec = run_and(
        &uniform_state(100, 30.0, 11),
        AndSetup { weights: &w, failure: &failure, noise: &NoiseModel::Gaussian { variance: 15.0 } },
        10_000,
        RngStream::new(1, 0),
        &Snapshots::None,
    )
    .unwrap();
    let x = &rec.final_state;
    let spread = x.iter().cloned().fold(f64::MIN, f64::max) - x.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 1.0, "spread {spread}");
}

#[test]
fn diverging_weights_are_reported() {
    let failure = LinkFailureModel::fixed(Graph::complete(10).unwrap());
    let w = WeightSequence::new(5.0, 0.6, 1.0).unwrap();
    let err = run_and(
        &uniform_state(10, 1.0, 0),
        AndSetup { weights: &w, failure: &failure, noise: &NoiseModel::None },
        1000,
        RngStream::new(0, 0),
        &Snapshots::None,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Diverged { iteration } if iteration > 0));
}

/// `sum_{j < n} (s / (j + a)^beta)^2` plus a tail bracketed by integrals.
fn partial_sum_oracle(s: f64, beta: f64, a: f64, n: usize) -> (f64, f64) {
    let q = 2.0 * beta;
    let mut head = 0.0;
    for j in (0..n).rev() {
        head += (j as f64 + a).powf(-q);
    }
    let tail_at = |x: f64| x.powf(1.0 - q) / (q - 1.0);
    let (lo, hi) = (tail_at(n as f64 + a), tail_at(n as f64 + a - 1.0));
    (s * s * (head + lo), s * s * (head + hi))
}

#[test]
fn sum_of_squares_matches_long_partial_sum() {
    for (s, beta, a) in
        [(1.0, 1.0, 1.0), (0.2, 1.0, 1.0), (1.0, 0.6, 1.0), (0.3, 0.75, 20.0), (1.0, 1.0, 20.0), (0.5, 0.9, 3.0)]
    {
        let w = WeightSequence::new(s, beta, a).unwrap();
        let (lo, hi) = partial_sum_oracle(s, beta, a, 10_000_000);
        let got = w.sum_of_squares();
        let mid = 0.5 * (lo + hi);
        assert!(got >= lo * (1.0 - 1e-12) && got <= hi * (1.0 + 1e-12), "{s} {beta} {a}: {got} not in [{lo}, {hi}]");
        assert!((got - mid).abs() <= 1e-9 * mid.max(hi - lo));
    }
    let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
    assert!((WeightSequence::harmonic(1.0).unwrap().sum_of_squares() - pi2_6).abs() < 1e-15);
    assert!((WeightSequence::harmonic(1.0).unwrap().sum_of_squares() - 1.644934).abs() < 1e-6);
}

#[test]
fn mse_closed_forms() {
    let w = WeightSequence::harmonic(0.2).unwrap();
    let z = mse_bound(&w, 18_000.0, 100).unwrap();
    let direct = 18_000.0 / 1e4 / 25.0 * std::f64::consts::PI.powi(2) / 6.0;
    assert!((z - direct).abs() < 1e-15);
    assert_eq!(erasure_mse_exact(500, 30.0, 0.4, 100, &w).unwrap(), z);
    let doubled = erasure_mse_exact(500, 60.0, 0.4, 100, &w).unwrap();
    assert!((doubled - 2.0 * z).abs() < 1e-15);
}

#[test]
fn weight_scaling_round_trip() {
    for (beta, a) in [(1.0, 1.0), (0.7, 1.0), (0.9, 5.0)] {
        let base = WeightSequence::new(1.0, beta, a).unwrap();
        for target in [1e-4, 0.05, 3.0] {
            let scaled = scale_weights_for_mse(target, 18_000.0, 100, &base).unwrap();
            let back = mse_bound(&scaled, 18_000.0, 100).unwrap();
            assert!((back - target).abs() <= 1e-10 * target);
        }
        let current = mse_bound(&base, 18_000.0, 100).unwrap();
        let same = scale_weights_for_mse(current, 18_000.0, 100, &base).unwrap();
        assert!((same.scale() - 1.0).abs() < 1e-12);
    }
    let (eps, eta, n) = (0.01, 250.0, 40);
    let s = scale_weights_for_mse(eps, eta, n, &WeightSequence::harmonic(1.0).unwrap()).unwrap().scale();
    let expect = (6.0 * eps).sqrt() * n as f64 / (eta.sqrt() * std::f64::consts::PI);
    assert!((s - expect).abs() < 1e-12 * expect);
}

#[test]
fn mean_rate_bound_edge_cases() {
    let w = WeightSequence::new(1.0, 1.0, 20.0).unwrap();
    assert_eq!(mean_convergence_bound(0, 1.0, 5.0, &w, 7.0).unwrap().bound, 7.0);
    assert_eq!(mean_convergence_bound(500, 0.0, 5.0, &w, 7.0).unwrap().bound, 7.0);
    let b = mean_convergence_bound(100, 1.0, 5.0, &w, 7.0).unwrap();
    assert_eq!(b.valid_from, 0);
    let expect = (-w.partial_sum(100)).exp() * 7.0;
    assert!((b.require_valid().unwrap() - expect).abs() < 1e-12);

    let big = WeightSequence::harmonic(1.0).unwrap();
    let b = mean_convergence_bound(100, 1.0, 5.0, &big, 7.0).unwrap();
    assert_eq!(b.valid_from, 2);
    assert!(matches!(b.require_valid(), Err(Error::PreconditionViolated { index: 0 })));
}

#[test]
fn stronger_weights_trade_error_for_speed() {
    // sigma^2 = 50, alpha_s(i) = s/(i+1) for s = 0.33 and s = 0.1.
    let failure = LinkFailureModel::erasure(erdos_renyi(100, 500, 2).unwrap(), 0.4).unwrap();
    let noise = NoiseModel::Gaussian { variance: 50.0 };
    let x0 = uniform_state(100, 30.0, 11);
    let runs = 50;
    let curve = |s: f64| -> (f64, f64) {
        let w = WeightSequence::harmonic(s).unwrap();
        let snaps = Snapshots::At(vec![100, 10_000]);
        let (mut early, mut late) = (0.0, 0.0);
        for k in 0..runs {
            let rec = run_and(
                &x0,
                AndSetup { weights: &w, failure: &failure, noise: &noise },
                10_000,
                RngStream::new(21, k),
                &snaps,
            )
            .unwrap();
            let r = rec.initial_average;
            let mse = |x: &[f64]| x.iter().map(|v| (v - r).powi(2)).sum::<f64>() / x.len() as f64;
            early += mse(rec.snapshot_at(100).unwrap());
            late += mse(rec.snapshot_at(10_000).unwrap());
        }
        (early / runs as f64, late / runs as f64)
    };
    let (fast_early, fast_late) = curve(0.33);
    let (slow_early, slow_late) = curve(0.1);
    println!("s=0.33: {fast_early:.4} -> {fast_late:.4}; s=0.1: {slow_early:.4} -> {slow_late:.4}");
    assert!(fast_early < slow_early);
    assert!(fast_late > slow_late);
}
