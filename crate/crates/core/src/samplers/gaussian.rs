//! Gaussian conditionals and the over-relaxation / antithetic /
//! exact-Hamiltonian family of moves.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// How a Gaussian block is refreshed from its full conditional `N(μ, Σ)`.
///
/// All four are `θ' = μ + sin t · z + cos t · (θ − μ)` with `z ~ N(0, Σ)`:
/// `t = π/2` is an independent draw, `t = π` the antithetic reflection and
/// `t = acos(−κ)` over-relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ProposalMode {
    #[default]
    Independent,
    Antithetic,
    OverRelax { kappa: f64 },
    ExactGaussHmc { t: f64 },
}

impl ProposalMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::OverRelax { kappa } if !(kappa > -1.0 && kappa <= 1.0) => {
                Err(Error::arg(format!("over-relaxation kappa must lie in (-1, 1], got {kappa}")))
            }
            Self::ExactGaussHmc { t } if !t.is_finite() => Err(Error::arg("Hamiltonian time must be finite")),
            _ => Ok(()),
        }
    }

    /// True when the move uses no randomness.
    pub fn is_deterministic(&self) -> bool {
        match *self {
            Self::Independent => false,
            Self::Antithetic => true,
            Self::OverRelax { kappa } => kappa == 1.0,
            Self::ExactGaussHmc { t } => sin_cos(t).0 == 0.0,
        }
    }
}

/// A chain made only of deterministic blocks is periodic; refuse it.
pub fn ensure_stochastic(modes: &[ProposalMode]) -> Result<()> {
    if !modes.is_empty() && modes.iter().all(ProposalMode::is_deterministic) {
        return Err(Error::config(
            "every block is deterministic; at least one block must be sampled stochastically",
        ));
    }
    Ok(())
}

/// Conditional mean and standard deviation of coordinate `d` of `N(μ, Σ)`
/// given the remaining coordinates `x_minus_d` (in their original order).
pub fn conditional_normal_params<T: Real>(
    mu: &DVector<T>,
    sigma: &DMatrix<T>,
    d: usize,
    x_minus_d: &[T],
) -> Result<(T, T)> {
    let n = mu.len();
    if sigma.nrows() != n || sigma.ncols() != n || d >= n || x_minus_d.len() + 1 != n {
        return Err(Error::arg("conditional_normal_params: dimension mismatch"));
    }
    if n == 1 {
        return Ok((mu[0], sigma[(0, 0)].sqrt()));
    }
    let others: Vec<usize> = (0..n).filter(|&k| k != d).collect();
    let s22 = DMatrix::from_fn(n - 1, n - 1, |a, b| sigma[(others[a], others[b])]);
    let s12 = DVector::from_fn(n - 1, |a, _| sigma[(d, others[a])]);
    let resid = DVector::from_fn(n - 1, |a, _| x_minus_d[a] - mu[others[a]]);
    let chol = s22.cholesky().ok_or(Error::Singular("conditioning block"))?;
    let w = chol.solve(&s12);
    let mean = mu[d] + w.dot(&resid);
    let var = sigma[(d, d)] - w.dot(&s12);
    if !(var > T::zero()) {
        return Err(Error::Singular("conditional variance"));
    }
    Ok((mean, var.sqrt()))
}

/// Same conditional from the precision matrix `P = Σ⁻¹` and the full
/// current vector `x` (entry `d` ignored).
#[inline]
pub fn conditional_from_precision<T: Real>(mu: &[T], prec: &DMatrix<T>, d: usize, x: &[T]) -> (T, T) {
    let pdd = prec[(d, d)];
    let mut acc = T::zero();
    for k in 0..mu.len() {
        if k != d {
            acc += prec[(d, k)] * (x[k] - mu[k]);
        }
    }
    (mu[d] - acc / pdd, (T::one() / pdd).sqrt())
}

/// `2μ − θ`.
pub fn antithetic_step<T: Real>(theta: &[T], mu: &[T]) -> Vec<T> {
    assert_eq!(theta.len(), mu.len(), "antithetic_step: length mismatch");
    let two = lit::<T>(2.0);
    theta.iter().zip(mu).map(|(&t, &m)| two * m - t).collect()
}

/// `(1+κ)μ − κθ + uσ√(1−κ²)` for a given standard normal `u`.
#[inline]
pub fn over_relax_with<T: Real>(theta: T, mu: T, sigma: T, kappa: T, u: T) -> T {
    (T::one() + kappa) * mu - kappa * theta + u * sigma * (T::one() - kappa * kappa).sqrt()
}

pub fn over_relax_step<R: Rng + ?Sized>(theta: f64, mu: f64, sigma: f64, kappa: f64, rng: &mut R) -> Result<f64> {
    if !(kappa > -1.0 && kappa <= 1.0) {
        return Err(Error::arg(format!("over-relaxation kappa must lie in (-1, 1], got {kappa}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::arg("over-relaxation sigma must be positive"));
    }
    let u: f64 = rng.sample(StandardNormal);
    Ok(over_relax_with(theta, mu, sigma, kappa, u))
}

/// `(sin t, cos t)`, exact at multiples of `π/2`.
fn sin_cos<T: Real>(t: T) -> (T, T) {
    let half_pi = T::frac_pi_2();
    let q = t / half_pi;
    let r = q.round();
    if q == r {
        let k = (r.to_i64().unwrap_or(0)).rem_euclid(4);
        let (s, c) = [(0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, 0.0)][k as usize];
        return (lit(s), lit(c));
    }
    if t == T::pi() {
        return (T::zero(), -T::one());
    }
    (t.sin(), t.cos())
}

/// `θ(t) = (1 − cos t) μ + cos t · θ0 + sin t · Σ u0`, the exact Hamiltonian
/// flow for a Gaussian target with unit mass.
pub fn exact_gauss_hmc<T: Real>(theta0: &[T], u0: &[T], t: T, mu: &[T], sigma: &DMatrix<T>) -> Vec<T> {
    let n = theta0.len();
    assert!(u0.len() == n && mu.len() == n && sigma.nrows() == n, "exact_gauss_hmc: dimension mismatch");
    let (s, c) = sin_cos(t);
    let push = if s == T::zero() {
        DVector::zeros(n)
    } else {
        sigma * DVector::from_column_slice(u0)
    };
    flow(theta0, mu, s, c, push.as_slice())
}

fn flow<T: Real>(theta: &[T], mu: &[T], s: T, c: T, push: &[T]) -> Vec<T> {
    let one = T::one();
    theta
        .iter()
        .zip(mu)
        .zip(push)
        .map(|((&th, &m), &p)| {
            let base = (one - c) * m + c * th;
            if s == T::zero() {
                base
            } else {
                base + s * p
            }
        })
        .collect()
}

/// Refresh a block with full conditional `N(μ, L Lᵀ)` under `mode`.
/// `chol_lower` is `L`; it is ignored by the deterministic moves.
pub fn gaussian_block_move<R: Rng + ?Sized>(
    theta: &[f64],
    mu: &[f64],
    chol_lower: &DMatrix<f64>,
    mode: ProposalMode,
    rng: &mut R,
) -> Vec<f64> {
    let n = theta.len();
    block_move_with(theta, mu, mode, || {
        let u = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        (chol_lower * u).as_slice().to_vec()
    })
}

/// As [`gaussian_block_move`], with `noise` returning a fresh `N(0, Σ)`
/// draw. `noise` is not called by deterministic moves.
pub fn block_move_with<F: FnOnce() -> Vec<f64>>(theta: &[f64], mu: &[f64], mode: ProposalMode, noise: F) -> Vec<f64> {
    match mode {
        ProposalMode::Independent => {
            let z = noise();
            mu.iter().zip(&z).map(|(m, z)| m + z).collect()
        }
        ProposalMode::Antithetic => antithetic_step(theta, mu),
        ProposalMode::OverRelax { kappa } => {
            if kappa == 1.0 {
                return antithetic_step(theta, mu);
            }
            let z = noise();
            let root = (1.0 - kappa * kappa).sqrt();
            theta
                .iter()
                .zip(mu)
                .zip(&z)
                .map(|((&th, &m), &z)| (1.0 + kappa) * m - kappa * th + root * z)
                .collect()
        }
        ProposalMode::ExactGaussHmc { t } => {
            let (s, c) = sin_cos(t);
            if s == 0.0 {
                return flow(theta, mu, s, c, theta);
            }
            let z = noise();
            flow(theta, mu, s, c, &z)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn antithetic_identities() {
        let mu = [0.0, 0.0];
        assert_eq!(antithetic_step(&[2.0, -3.0], &mu), vec![-2.0, 3.0]);
        let theta = [0.123456789, -7.5, 1e-300];
        assert_eq!(antithetic_step(&theta, &theta), theta.to_vec());
        // on a dyadic grid 2μ − θ is computed without rounding
        let t = [0.375, -7.5, 1024.0 + 1.0 / 64.0];
        let m = [3.25, 0.125, -2.0];
        assert_eq!(antithetic_step(&antithetic_step(&t, &m), &m), t.to_vec());
    }

    #[test]
    fn over_relax_limits() {
        for &u in &[-2.0, 0.0, 1.7] {
            assert_eq!(over_relax_with(1.5, 0.25, 2.0, 1.0, u), antithetic_step(&[1.5], &[0.25])[0]);
            assert_eq!(over_relax_with(1.5, 0.25, 2.0, 0.0, u), 0.25 + 2.0 * u);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(over_relax_step(0.0, 0.0, 1.0, 1.5, &mut rng).is_err());
        assert!(over_relax_step(0.0, 0.0, 1.0, -1.0, &mut rng).is_err());
    }

    #[test]
    fn exact_hmc_special_times() {
        let sigma = dmatrix![2.0, 0.3; 0.3, 1.0];
        let theta = [0.7, -1.1];
        let mu = [0.2, 0.4];
        let u = [0.9, -0.35];
        assert_eq!(exact_gauss_hmc(&theta, &u, PI, &mu, &sigma), antithetic_step(&theta, &mu));
        assert_eq!(exact_gauss_hmc(&theta, &u, 0.0, &mu, &sigma), theta.to_vec());
        let quarter = exact_gauss_hmc(&theta, &u, PI / 2.0, &mu, &sigma);
        let push = &sigma * DVector::from_column_slice(&u);
        assert_eq!(quarter, vec![mu[0] + push[0], mu[1] + push[1]]);
    }

    #[test]
    fn deterministic_detection() {
        assert!(ProposalMode::Antithetic.is_deterministic());
        assert!(ProposalMode::OverRelax { kappa: 1.0 }.is_deterministic());
        assert!(ProposalMode::ExactGaussHmc { t: PI }.is_deterministic());
        assert!(!ProposalMode::ExactGaussHmc { t: PI / 2.0 }.is_deterministic());
        assert!(ensure_stochastic(&[ProposalMode::Antithetic, ProposalMode::Antithetic]).is_err());
        assert!(ensure_stochastic(&[ProposalMode::Antithetic, ProposalMode::Independent]).is_ok());
    }

    #[test]
    fn conditional_bivariate() {
        let r: f64 = 0.6;
        let s = dmatrix![1.0, r; r, 1.0];
        let (m, sd) = conditional_normal_params(&DVector::from_vec(vec![0.0, 0.0]), &s, 0, &[1.0]).unwrap();
        assert!((m - r).abs() < 1e-15 && (sd - (1.0 - r * r).sqrt()).abs() < 1e-15);
        let (m2, sd2) = conditional_normal_params(&DVector::from_vec(vec![0.5, -1.0]), &DMatrix::identity(2, 2), 1, &[7.0]).unwrap();
        assert_eq!((m2, sd2), (-1.0, 1.0));
    }

    #[test]
    fn precision_and_covariance_forms_agree() {
        let s = dmatrix![2.0, 0.3, -0.4; 0.3, 1.0, 0.2; -0.4, 0.2, 1.5];
        let p = s.clone().try_inverse().unwrap();
        let mu = [0.1, -0.2, 0.3];
        let x = [1.0, 2.0, -1.0];
        for d in 0..3 {
            let rest: Vec<f64> = (0..3).filter(|&k| k != d).map(|k| x[k]).collect();
            let (m1, s1) = conditional_normal_params(&DVector::from_column_slice(&mu), &s, d, &rest).unwrap();
            let (m2, s2) = conditional_from_precision(&mu, &p, d, &x);
            assert!((m1 - m2).abs() < 1e-12 && (s1 - s2).abs() < 1e-12);
        }
    }

    #[test]
    fn block_move_antithetic_uses_no_randomness() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let b = a.clone();
        let l = DMatrix::identity(2, 2);
        let out = gaussian_block_move(&[1.0, 2.0], &[0.0, 0.5], &l, ProposalMode::Antithetic, &mut a);
        assert_eq!(out, vec![-1.0, -1.0]);
        assert_eq!(a, b);
    }
}
