//! One-coefficient models checked against grid quadrature.

mod common;

use common::{one_column, weighted_median, Grid};
use spa_core::smc::{fixed_b_mcmc, init_particles, run_sampler, FixedChainConfig, Schedule, SmcConfig};
use spa_core::summary::{abs_median_path, c_posterior};
use spa_core::GtPrior;

#[test]
fn initial_particles_follow_the_first_posterior() {
    let data = one_column(50, 0.6, 3);
    let (a, c) = (1.0, 2.0);
    let prior = GtPrior::new(a, c).unwrap();
    let config = SmcConfig {
        particles: 8192,
        seed: 31,
        ..SmcConfig::default()
    };
    let (system, _) = init_particles(&data, &prior, &config).unwrap();
    let grid = Grid::new(&data, a, c, 8.0, 40_000);
    let mut xs: Vec<f64> = system.particles.iter().map(|p| p.beta[0]).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let ks = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = grid.cdf_at(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.05, "KS distance {ks}");
}

#[test]
fn fixed_scale_chain_median_matches_quadrature() {
    let data = one_column(60, -0.5, 5);
    let (a, c) = (4.0, 0.3);
    let prior = GtPrior::new(a, c).unwrap();
    let chain = fixed_b_mcmc(
        &data,
        &prior,
        &FixedChainConfig {
            samples: 100_000,
            seed: 17,
            ..FixedChainConfig::default()
        },
    )
    .unwrap();
    let xs = chain.coefficient(0);
    let median = weighted_median(&xs, &vec![1.0; xs.len()]);
    let oracle = Grid::new(&data, a, c, 8.0, 40_000).quantile(0.5);
    assert!((median - oracle).abs() < 0.02, "chain {median} vs oracle {oracle}");
}

#[test]
fn sampler_path_tracks_quadrature() {
    let data = one_column(50, 0.6, 7);
    let a = 1.0;
    let schedule = Schedule::new(2.0, 0.98, 100).unwrap();
    let out = run_sampler(
        &data,
        a,
        &schedule,
        &SmcConfig {
            particles: 8192,
            seed: 4,
            ..SmcConfig::default()
        },
    )
    .unwrap();

    // Medians along the path.
    let z = abs_median_path(&out).unwrap();
    for t in [1usize, 25, 50, 75, 100] {
        let snap = out.snapshot(t).unwrap();
        let grid = Grid::new(&data, a, snap.b / a, 8.0, 40_000);
        let oracle = grid.quantile(0.5);
        let sampled = weighted_median(&snap.coefficient(0), &snap.weights);
        assert!((sampled - oracle).abs() < 0.02, "t={t}: median {sampled} vs {oracle}");
        assert!((z[t - 1][0] - oracle.abs()).abs() < 0.02, "t={t}: |median| {} vs {}", z[t - 1][0], oracle.abs());
    }

    // Evidence ratios and the location of the scale mode.
    let log_z: Vec<f64> = schedule
        .values()
        .iter()
        .map(|&b| Grid::new(&data, a, b / a, 8.0, 40_000).log_z)
        .collect();
    let exact_ratio = log_z[99] - log_z[0];
    let sampled_ratio = out.steps[99].log_z_ratio_cum;
    assert!(
        (sampled_ratio - exact_ratio).exp_m1().abs() < 0.05,
        "Z ratio {sampled_ratio} vs {exact_ratio}"
    );
    let argmax = (0..log_z.len()).fold(0, |best, k| if log_z[k] > log_z[best] { k } else { best });
    let post = c_posterior(&out).unwrap();
    assert_eq!(post.mode_t(), argmax + 1, "scale mode step");
    assert!(out.steps.iter().all(|s| s.ess <= 8192.0 * (1.0 + 1e-12) && s.ess >= 1.0));
}
