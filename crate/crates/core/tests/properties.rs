use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rand_distr::Normal as NormalSampler;
use statrs::distribution::{ContinuousCDF, Normal};

use mvprobit::corr::{corr_to_partial, log_prior_corr, partial_to_corr, vechl_len, CorrelationMatrix, UnitCholesky};
use mvprobit::diagnostics::{ess, iact, ks_statistic_cdf, rmse};
use mvprobit::priors::sample_corr_marg_uniform;
use mvprobit::samplers::{
    antithetic_step, exact_gauss_hmc, leapfrog, over_relax_with, sample_truncated_normal, ProposalMode,
};

fn cholesky_strategy() -> impl Strategy<Value = UnitCholesky> {
    (2usize..=6).prop_flat_map(|d| {
        prop::collection::vec(-3.0f64..3.0, vechl_len(d)).prop_map(move |e| UnitCholesky::new(d, e).unwrap())
    })
}

fn assert_valid_correlation(r: &CorrelationMatrix) {
    let m = r.as_matrix();
    for i in 0..r.dim() {
        assert_eq!(m[(i, i)], 1.0);
        for j in 0..i {
            assert!((m[(i, j)] - m[(j, i)]).abs() <= 1e-12);
            assert!(m[(i, j)].abs() < 1.0);
        }
    }
    assert!(m.clone().symmetric_eigenvalues().min() > 0.0);
}

fn dyadic() -> impl Strategy<Value = f64> {
    (-(1i64 << 20)..(1i64 << 20)).prop_map(|k| k as f64 / 1024.0)
}

proptest! {
    #[test]
    fn unit_cholesky_always_gives_a_correlation(l in cholesky_strategy()) {
        let r = l.to_correlation();
        assert_valid_correlation(&r);
        prop_assert!((l.to_matrix() * l.to_matrix().transpose()).cholesky().is_some());
    }

    #[test]
    fn round_trips(l in cholesky_strategy()) {
        let r = l.to_correlation();
        let back = UnitCholesky::from_correlation(&r).unwrap();
        for (a, b) in l.entries().iter().zip(back.entries()) {
            prop_assert!((a - b).abs() < 1e-10, "{} vs {}", a, b);
        }
        prop_assert!((back.to_correlation().as_matrix() - r.as_matrix()).amax() < 1e-10);
    }

    #[test]
    fn determinant_from_row_norms(l in cholesky_strategy()) {
        let direct = l.to_correlation().as_matrix().determinant();
        prop_assert!((l.log_det_correlation().exp() - direct).abs() < 1e-10);
    }

    #[test]
    fn partials_rebuild_correlation(l in cholesky_strategy()) {
        let r = l.to_correlation();
        let p = corr_to_partial(&r).unwrap();
        let diag: Vec<f64> = r.inverse().unwrap().diagonal().iter().copied().collect();
        let back = partial_to_corr(&p, &diag).unwrap();
        prop_assert!((back.as_matrix() - r.as_matrix()).amax() < 1e-10);
    }

    #[test]
    fn bivariate_uniform_prior_is_flat(r in -0.999f64..0.999) {
        let m = CorrelationMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, r, r, 1.0])).unwrap();
        prop_assert!(log_prior_corr(&m, 3.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn prior_draws_are_valid(d in 1usize..7, extra in 0.0f64..5.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = sample_corr_marg_uniform(d, d as f64 + extra, &mut rng).unwrap();
        assert_valid_correlation(&r);
    }

    #[test]
    fn antithetic_identities(theta in prop::collection::vec(dyadic(), 1..6), shift in dyadic(), u in -5.0f64..5.0) {
        let mu: Vec<f64> = theta.iter().map(|t| t + shift).collect();
        prop_assert_eq!(antithetic_step(&antithetic_step(&theta, &mu), &mu), theta.clone());
        prop_assert_eq!(over_relax_with(theta[0], mu[0], 0.7, 1.0, u), antithetic_step(&theta[..1], &mu[..1])[0]);
        let n = theta.len();
        let sigma = DMatrix::from_fn(n, n, |i, j| if i == j { 2.0 } else { 0.1 });
        let mom = vec![u; n];
        prop_assert_eq!(exact_gauss_hmc(&theta, &mom, std::f64::consts::PI, &mu, &sigma), antithetic_step(&theta, &mu));
    }

    #[test]
    fn invalid_kappa_rejected(kappa in prop_oneof![-10.0f64..=-1.0, 1.0001f64..10.0]) {
        let mode = ProposalMode::OverRelax { kappa };
        prop_assert!(mode.validate().is_err());
    }

    #[test]
    fn truncated_draws_stay_inside(
        mu in -50.0f64..50.0,
        sigma in 0.01f64..20.0,
        a in -30.0f64..30.0,
        width in prop_oneof![Just(f64::INFINITY), 1e-6f64..10.0],
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = (a, a + width);
        for _ in 0..20 {
            let x = sample_truncated_normal(mu, sigma, lo, hi, &mut rng).unwrap();
            prop_assert!(x > lo && x < hi, "{} outside ({}, {})", x, lo, hi);
            let y = sample_truncated_normal(mu, sigma, -hi, -lo, &mut rng).unwrap();
            prop_assert!(y > -hi && y < -lo);
        }
    }

    #[test]
    fn iact_affine_invariant(seed in any::<u64>(), a in prop_oneof![-100.0f64..-0.01, 0.01f64..100.0], b in -100.0f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = 0.0;
        let s: Vec<f64> = (0..500).map(|_| { x = 0.6 * x + rng.sample::<f64, _>(StandardNormal); x }).collect();
        let t: Vec<f64> = s.iter().map(|v| a * v + b).collect();
        let (i1, i2) = (iact(&s).unwrap(), iact(&t).unwrap());
        prop_assert!((i1 - i2).abs() < 1e-8 * i1.max(1.0), "{} vs {}", i1, i2);
        prop_assert!((ess(&s).unwrap() * i1 - 500.0).abs() < 1e-9);
    }

    #[test]
    fn rmse_ignores_order(mut draws in prop::collection::vec(-10.0f64..10.0, 1..50), truth in -5.0f64..5.0) {
        let before = rmse(&draws, truth);
        prop_assert!(before >= 0.0);
        draws.reverse();
        let third = draws.len() / 3;
        draws.rotate_left(third);
        prop_assert!((rmse(&draws, truth) - before).abs() < 1e-12);
    }

    #[test]
    fn leapfrog_is_reversible_and_volume_preserving(
        q in prop::collection::vec(-2.0f64..2.0, 3),
        p in prop::collection::vec(-2.0f64..2.0, 3),
        eps in 0.01f64..0.1,
        steps in 1usize..10,
    ) {
        // anharmonic potential U = Σ q⁴/4 + q_0 q_1
        let grad = |q: &[f64]| -> Result<Vec<f64>, mvprobit::Error> {
            Ok(vec![-(q[0].powi(3) + q[1]), -(q[1].powi(3) + q[0]), -q[2].powi(3)])
        };
        let inv_mass = [1.0, 1.0, 1.0];
        let (q1, p1) = leapfrog(&q, &p, eps, steps, grad, &inv_mass).unwrap();
        let neg: Vec<f64> = p1.iter().map(|v| -v).collect();
        let (q2, p2) = leapfrog(&q1, &neg, eps, steps, grad, &inv_mass).unwrap();
        for i in 0..3 {
            prop_assert!((q2[i] - q[i]).abs() < 1e-9 && (p2[i] + p[i]).abs() < 1e-9);
        }
        let h = 1e-6;
        let mut jac = DMatrix::zeros(6, 6);
        for k in 0..6 {
            let mut up = [q.clone(), p.clone()].concat();
            let mut dn = up.clone();
            up[k] += h;
            dn[k] -= h;
            let (qu, pu) = leapfrog(&up[..3], &up[3..], eps, steps, grad, &inv_mass).unwrap();
            let (qd, pd) = leapfrog(&dn[..3], &dn[3..], eps, steps, grad, &inv_mass).unwrap();
            let fu = [qu, pu].concat();
            let fd = [qd, pd].concat();
            for row in 0..6 {
                jac[(row, k)] = (fu[row] - fd[row]) / (2.0 * h);
            }
        }
        prop_assert!((jac.determinant() - 1.0).abs() < 1e-6, "det {}", jac.determinant());
    }
}

/// One step of each stochastic move from a stationary draw must leave
/// `N(μ, σ²)` invariant.
#[test]
fn stochastic_moves_preserve_the_target() {
    let (mu, sigma) = (1.5, 0.7);
    let normal = Normal::new(mu, sigma).unwrap();
    let draw = NormalSampler::new(mu, sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 1_000_000;
    for kappa in [-0.5, 0.0, 0.9] {
        let out: Vec<f64> = (0..n)
            .map(|_| {
                let x = draw.sample(&mut rng);
                over_relax_with(x, mu, sigma, kappa, rng.sample::<f64, _>(StandardNormal))
            })
            .collect();
        let ks = ks_statistic_cdf(&out, |v| normal.cdf(v));
        assert!(ks.p_value > 0.01, "kappa {kappa}: {ks:?}");
    }
    let var = DMatrix::from_element(1, 1, sigma * sigma);
    for t in [0.3, std::f64::consts::FRAC_PI_2, 2.5] {
        let out: Vec<f64> = (0..n)
            .map(|_| {
                let x = draw.sample(&mut rng);
                let u = rng.sample::<f64, _>(StandardNormal) / sigma;
                exact_gauss_hmc(&[x], &[u], t, &[mu], &var)[0]
            })
            .collect();
        let ks = ks_statistic_cdf(&out, |v| normal.cdf(v));
        assert!(ks.p_value > 0.01, "t {t}: {ks:?}");
    }
}
