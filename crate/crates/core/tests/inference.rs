use mvprobit::data::{simulate_panel, CovariateGenerator, PanelData, TrueParams, INTERCEPT};
use mvprobit::diagnostics::{ess, mean, quantiles, sd};
use mvprobit::inference::{run_chain, BetaPriorSpec, Block, ModelSpec, SamplerConfig};
use mvprobit::samplers::ProposalMode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn small_truth() -> TrueParams {
    TrueParams {
        outcomes: vec!["y1".into(), "y2".into()],
        covariates: vec![INTERCEPT.into(), "x".into()],
        beta: vec![-0.3, 0.8, 0.4, -0.6],
        r_eps: vec![0.5],
        sigma_alpha: vec![vec![0.6, 0.2], vec![0.2, 0.4]],
    }
}

fn small_panel(seed: u64) -> PanelData {
    simulate_panel(&small_truth(), 60, 6, &CovariateGenerator::Gaussian { columns: 2 }, seed)
        .unwrap()
        .data
}

/// `|mean_a - mean_b|` and `|sd_a - sd_b|` in units of their combined
/// Monte Carlo standard errors.
fn z_scores(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (ea, eb) = (ess(a).unwrap(), ess(b).unwrap());
    let (sa, sb) = (sd(a), sd(b));
    let zm = (mean(a) - mean(b)).abs() / (sa * sa / ea + sb * sb / eb).sqrt();
    let zs = (sa - sb).abs() / (sa * sa / (2.0 * ea) + sb * sb / (2.0 * eb)).sqrt();
    (zm, zs)
}

#[test]
fn antithetic_and_independent_runs_agree() {
    let data = small_panel(21);
    let spec = ModelSpec::default();
    let cfg = |mode, seed| SamplerConfig {
        iterations: 12_000,
        burn_in: 2_000,
        seed,
        beta_mode: mode,
        alpha_mode: mode,
        ..Default::default()
    };
    let is = run_chain(&data, &spec, &cfg(ProposalMode::Independent, 1)).unwrap();
    let an = run_chain(&data, &spec, &cfg(ProposalMode::Antithetic, 2)).unwrap();
    let check = |a: &Block, b: &Block, cols: std::ops::Range<usize>| {
        for j in cols {
            let (zm, zs) = z_scores(&a.series(j), &b.series(j));
            assert!(zm < 3.0 && zs < 3.0, "column {j}: mean z {zm:.2}, sd z {zs:.2}");
        }
    };
    check(&is.beta, &an.beta, 0..4);
    check(is.block("alpha").unwrap(), an.block("alpha").unwrap(), 0..10);
}

#[test]
fn model_two_with_pinned_individual_effects_matches_model_one() {
    let data = small_panel(22);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let z: Vec<f64> = (0..data.individuals()).map(|_| rng.sample(StandardNormal)).collect();
    let with_z = data.clone().with_individual_covariates(vec!["z".into()], z).unwrap();
    let cfg = SamplerConfig {
        iterations: 10_000,
        burn_in: 2_000,
        seed: 3,
        ..Default::default()
    };
    let one = run_chain(&data, &ModelSpec::default(), &cfg).unwrap();
    let spec_two = ModelSpec {
        beta_prior: BetaPriorSpec::Normal {
            variance: 100.0,
            individual_variance: Some(1e-10),
        },
        individual_covariates: true,
        ..Default::default()
    };
    let two = run_chain(&with_z, &spec_two, &SamplerConfig { seed: 4, ..cfg.clone() }).unwrap();
    assert_eq!(two.covariates(), 3);
    for d in 0..2 {
        for k in 0..2 {
            let a = one.beta.series(d * 2 + k);
            let b = two.beta.series(d * 3 + k);
            let (zm, zs) = z_scores(&a, &b);
            assert!(zm < 3.0 && zs < 3.0, "beta {d},{k}: mean z {zm:.2}, sd z {zs:.2}");
        }
        assert!(two.beta.series(d * 3 + 2).iter().all(|v| v.abs() < 1e-3));
    }
}

/// Three survey outcomes with eight Gaussian covariates. The full survey
/// coding has too many sparse dummies to be identified from 240 cells.
fn three_outcome_truth() -> TrueParams {
    let base = TrueParams::paper_subset(3).unwrap();
    let k = 9;
    let mut beta = vec![0.0; 3 * k];
    for d in 0..3 {
        beta[d * k] = base.beta[d * base.covariates()];
    }
    for (d, j, v) in [(0, 1, 0.8), (0, 5, -0.5), (1, 2, 0.6), (1, 6, -0.9), (2, 3, 1.0), (2, 7, -0.4)] {
        beta[d * k + j] = v;
    }
    let covariates = std::iter::once(INTERCEPT.to_string()).chain((1..k).map(|j| format!("x{j}"))).collect();
    TrueParams { covariates, beta, ..base }
}

#[test]
fn credible_intervals_cover_the_truth() {
    let truth = three_outcome_truth();
    let gen = CovariateGenerator::Gaussian { columns: truth.covariates() };
    let (mut covered, mut total) = (0usize, 0usize);
    for r in 0..20 {
        let sim = simulate_panel(&truth, 30, 8, &gen, 500 + r).unwrap();
        let cfg = SamplerConfig {
            iterations: 2500,
            burn_in: 500,
            seed: r + 1,
            store_alpha: false,
            ..Default::default()
        };
        let draws = run_chain(&sim.data, &ModelSpec::default(), &cfg).unwrap();
        let diag: Vec<f64> = (0..3).map(|i| truth.sigma_alpha[i][i]).collect();
        let targets = [
            (&draws.beta, truth.beta.as_slice()),
            (&draws.r_eps, truth.r_eps.as_slice()),
            (&draws.sigma_alpha_diag, diag.as_slice()),
        ];
        for (block, values) in targets {
            for (j, &t) in values.iter().enumerate() {
                let q = quantiles(&block.series(j), &[0.025, 0.975]);
                covered += usize::from(q[0] <= t && t <= q[1]);
                total += 1;
            }
        }
    }
    let rate = covered as f64 / total as f64;
    assert!(rate >= 0.9, "coverage {rate:.3} over {total} intervals");
}
