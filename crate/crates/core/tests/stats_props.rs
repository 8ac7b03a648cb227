mod common;

use common::{batch_posterior, ks_critical_1pct, ks_statistic, mean_and_var, rel_err, uniform};
use rand_distr::{Distribution, StandardNormal};
use svnl_core::filter::{init_cloud, sample_theta, update_stats, SufficientStats};
use svnl_core::hermite::hermite_basis;
use svnl_core::rng::{stream, Purpose};
use svnl_core::{simulate, HermiteOrder, InitialState, LeverageSpec, PriorSpec, SvParams};

fn order(k: usize) -> HermiteOrder {
    HermiteOrder::new(k).unwrap()
}

fn dense_diag_inverse(a0: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a0.len();
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 / a0[i][i] } else { 0.0 }).collect()).collect()
}

#[test]
fn streaming_matches_batch_on_simulated_regression() {
    let k = order(2);
    let theta = SvParams::new(-0.026, 0.97, LeverageSpec::new(&[-0.045, -0.05]).unwrap(), 0.143).unwrap();
    let sim = simulate(&theta, 501, InitialState::Stationary, 9).unwrap();
    let prior = PriorSpec::standard(k);
    let mut stats = SufficientStats::from_prior(&prior, k).unwrap();
    let (mut rows, mut ys) = (Vec::new(), Vec::new());
    for t in 1..sim.latent.len() {
        let (x_prev, eps_prev, x_new) = (sim.latent[t - 1], sim.shocks[t - 1], sim.latent[t]);
        stats = update_stats(&stats, k, x_new, x_prev, Some(eps_prev)).unwrap();
        let mut w = vec![1.0, x_prev];
        w.extend(hermite_basis(2, eps_prev));
        rows.push(w);
        ys.push(x_new);
    }
    let batch = batch_posterior(&dense_diag_inverse(&prior.a0), &prior.b0, prior.c0, prior.d0, &rows, &ys);
    let flat = |m: &[Vec<f64>]| m.concat();
    assert!(rel_err(&flat(&stats.precision.to_dense()), &flat(&batch.precision)) < 1e-10);
    assert!(rel_err(&stats.precision_mean[..4], &batch.precision_mean) < 1e-10);
    assert!(rel_err(&stats.posterior_mean().unwrap()[..4], &batch.mean) < 1e-10);
    assert_eq!(stats.c, batch.c);
    assert!(((stats.d - batch.d) / batch.d).abs() < 1e-10, "{} vs {}", stats.d, batch.d);
}

#[test]
fn prior_draws_match_initial_cloud() {
    let k = order(1);
    let prior = PriorSpec::standard(k);
    let stats = SufficientStats::from_prior(&prior, k).unwrap();
    let n = 10_000;
    let draws: Vec<SvParams> = (0..n)
        .map(|i| sample_theta(&stats, k, &mut stream(99, Purpose::SampleTheta, 0, i)).unwrap().theta)
        .collect();
    let cloud = init_cloud(&prior, k, n as usize, 5).unwrap();
    let crit = ks_critical_1pct(n as usize, n as usize);
    let pick: [(&str, fn(&SvParams) -> f64); 4] = [
        ("mu", |p| p.mu),
        ("beta", |p| p.beta),
        ("phi1", |p| p.leverage.coeffs()[0]),
        ("omega", |p| p.omega),
    ];
    for (name, f) in pick {
        let a: Vec<f64> = draws.iter().map(f).collect();
        let b: Vec<f64> = cloud.particles.iter().map(|p| f(&p.theta)).collect();
        let d = ks_statistic(&a, &b);
        assert!(d < crit, "{name}: KS {d} >= {crit}");
    }
}

#[test]
fn posterior_concentrates_on_noiseless_truth() {
    let k = order(2);
    let truth = [0.3, 0.8, -0.2, 0.05];
    let mut stats = SufficientStats::from_prior(&PriorSpec::standard(k), k).unwrap();
    let mut r = common::rng(4);
    for _ in 0..100_000 {
        let x_prev = uniform(&mut r, -3.0, 3.0);
        let eps: f64 = StandardNormal.sample(&mut r);
        let h = hermite_basis(2, eps);
        let x_new = truth[0] + truth[1] * x_prev + truth[2] * h[0] + truth[3] * h[1];
        stats = update_stats(&stats, k, x_new, x_prev, Some(eps)).unwrap();
    }
    let mean = stats.posterior_mean().unwrap();
    for (m, t) in mean.iter().zip(truth) {
        assert!((m - t).abs() < 1e-3, "{m} vs {t}");
    }
}

#[test]
fn inverse_gamma_mean() {
    let k = order(0);
    let stats = SufficientStats::from_prior(&PriorSpec::standard(k), k).unwrap();
    let mut r = stream(3, Purpose::SampleTheta, 0, 0);
    let omega2: Vec<f64> =
        (0..1_000_000).map(|_| sample_theta(&stats, k, &mut r).unwrap().theta.omega.powi(2)).collect();
    let (mean, var) = mean_and_var(&omega2);
    let want = stats.d / (stats.c - 1.0);
    let se = (var / omega2.len() as f64).sqrt();
    assert!((mean - want).abs() < 3.0 * se, "mean {mean} want {want} se {se}");
}

#[test]
fn degenerate_prior_pins_coefficients() {
    let k = order(2);
    let mut prior = PriorSpec::standard(k);
    prior.b0 = vec![-0.1, 0.9, -0.05, 0.02];
    for (i, row) in prior.a0.iter_mut().enumerate() {
        row[i] = 1e-12;
    }
    let cloud = init_cloud(&prior, k, 2000, 8).unwrap();
    for p in &cloud.particles {
        let got = [p.theta.mu, p.theta.beta, p.theta.leverage.coeffs()[0], p.theta.leverage.coeffs()[1]];
        for (g, b) in got.iter().zip(&prior.b0) {
            assert!((g - b).abs() < 1e-5);
        }
    }
}
