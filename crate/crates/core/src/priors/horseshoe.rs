//! Horseshoe shrinkage through inverse-gamma auxiliaries.
//!
//! `β_j ~ N(0, τ² λ_j²)`, `λ_j² | ν_j ~ IG(½, 1/ν_j)`, `ν_j ~ IG(½, 1)`,
//! and the same pair `(τ², ξ)` for the global scale, so that `λ_j` and `τ`
//! are standard half-Cauchy.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::inv_gamma;
use crate::error::{Error, Result};

/// Prior variance for coefficients excluded from shrinkage.
pub const INTERCEPT_VARIANCE: f64 = 100.0;

/// How shrunk coefficients share a global scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauSharing {
    /// One `τ` over every shrunk coefficient.
    #[default]
    Global,
    /// One `τ` per outcome.
    PerOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorseshoeState {
    /// Global-scale group of each coefficient; `None` means not shrunk.
    group: Vec<Option<usize>>,
    pub lambda_sq: Vec<f64>,
    pub nu: Vec<f64>,
    pub tau_sq: Vec<f64>,
    pub xi: Vec<f64>,
    /// Fixed prior variance of the coefficients that are not shrunk.
    pub unshrunk_variance: f64,
}

impl HorseshoeState {
    /// Single global scale; `shrink[j]` selects the shrunk coefficients.
    pub fn new(shrink: &[bool]) -> Self {
        Self::with_groups(shrink.iter().map(|&s| s.then_some(0)).collect())
    }

    /// Coefficients laid out outcome-major with `per_outcome` entries each,
    /// the first of which is the intercept.
    pub fn for_design(outcomes: usize, per_outcome: usize, sharing: TauSharing) -> Self {
        let group = (0..outcomes * per_outcome)
            .map(|j| {
                let (d, k) = (j / per_outcome, j % per_outcome);
                (k != 0).then_some(match sharing {
                    TauSharing::Global => 0,
                    TauSharing::PerOutcome => d,
                })
            })
            .collect();
        Self::with_groups(group)
    }

    pub fn with_groups(group: Vec<Option<usize>>) -> Self {
        let n = group.len();
        let n_groups = group.iter().flatten().max().map_or(0, |g| g + 1);
        Self {
            group,
            lambda_sq: vec![1.0; n],
            nu: vec![1.0; n],
            tau_sq: vec![1.0; n_groups],
            xi: vec![1.0; n_groups],
            unshrunk_variance: INTERCEPT_VARIANCE,
        }
    }

    pub fn len(&self) -> usize {
        self.group.len()
    }

    pub fn is_empty(&self) -> bool {
        self.group.is_empty()
    }

    pub fn is_shrunk(&self, j: usize) -> bool {
        self.group[j].is_some()
    }

    pub fn shrunk_count(&self) -> usize {
        self.group.iter().flatten().count()
    }

    /// Current prior variances of the coefficients.
    pub fn prior_variances(&self) -> Vec<f64> {
        self.group
            .iter()
            .zip(&self.lambda_sq)
            .map(|(g, l)| g.map_or(self.unshrunk_variance, |g| self.tau_sq[g] * l))
            .collect()
    }

    /// Draw every auxiliary from the prior.
    pub fn sample_prior<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for g in 0..self.tau_sq.len() {
            self.xi[g] = inv_gamma(0.5, 1.0, rng);
            self.tau_sq[g] = inv_gamma(0.5, 1.0 / self.xi[g], rng);
        }
        for j in 0..self.len() {
            if self.is_shrunk(j) {
                self.nu[j] = inv_gamma(0.5, 1.0, rng);
                self.lambda_sq[j] = inv_gamma(0.5, 1.0 / self.nu[j], rng);
            }
        }
    }

    /// One Gibbs pass over `(λ², ν, τ², ξ)` given `β`. Returns the new prior
    /// variances.
    pub fn update<R: Rng + ?Sized>(&mut self, beta: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        if beta.len() != self.len() {
            return Err(Error::arg(format!(
                "horseshoe state covers {} coefficients, got {}",
                self.len(),
                beta.len()
            )));
        }
        for j in 0..self.len() {
            if let Some(g) = self.group[j] {
                let rate = 1.0 / self.nu[j] + beta[j] * beta[j] / (2.0 * self.tau_sq[g]);
                self.lambda_sq[j] = inv_gamma(1.0, rate, rng);
                self.nu[j] = inv_gamma(1.0, 1.0 + 1.0 / self.lambda_sq[j], rng);
            }
        }
        let n_groups = self.tau_sq.len();
        let mut count = vec![0usize; n_groups];
        let mut ss = vec![0.0; n_groups];
        for j in 0..self.len() {
            if let Some(g) = self.group[j] {
                count[g] += 1;
                ss[g] += beta[j] * beta[j] / self.lambda_sq[j];
            }
        }
        for g in 0..n_groups {
            let shape = (count[g] as f64 + 1.0) / 2.0;
            self.tau_sq[g] = inv_gamma(shape, 1.0 / self.xi[g] + ss[g] / 2.0, rng);
            self.xi[g] = inv_gamma(1.0, 1.0 + 1.0 / self.tau_sq[g], rng);
        }
        Ok(self.prior_variances())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::ks::ks_statistic_cdf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn intercepts_keep_flat_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut hs = HorseshoeState::for_design(3, 4, TauSharing::Global);
        let beta = vec![0.3; 12];
        for _ in 0..100 {
            let v = hs.update(&beta, &mut rng).unwrap();
            for d in 0..3 {
                assert_eq!(v[d * 4], INTERCEPT_VARIANCE);
            }
        }
        assert_eq!(hs.shrunk_count(), 9);
    }

    #[test]
    fn auxiliaries_stay_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut hs = HorseshoeState::new(&[true, true, false, true]);
        let mut beta = vec![0.0, 5.0, 1.0, -1e-6];
        for it in 0..100_000 {
            beta[0] = if it % 2 == 0 { 0.0 } else { 1e3 };
            hs.update(&beta, &mut rng).unwrap();
            let all = hs.lambda_sq.iter().chain(&hs.nu).chain(&hs.tau_sq).chain(&hs.xi);
            assert!(all.copied().all(|v| v > 0.0 && v.is_finite()));
        }
    }

    #[test]
    fn per_outcome_groups() {
        let hs = HorseshoeState::for_design(2, 3, TauSharing::PerOutcome);
        assert_eq!(hs.tau_sq.len(), 2);
        assert_eq!(hs.group, vec![None, Some(0), Some(0), None, Some(1), Some(1)]);
    }

    #[test]
    fn local_scale_prior_is_half_cauchy() {
        // alternate β | λ, τ ~ N(0, τ²λ²) with the auxiliary update; the joint
        // chain targets the prior, so λ_j is standard half-Cauchy
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut hs = HorseshoeState::new(&[true; 4]);
        let mut beta = vec![0.0; 4];
        let mut lambdas = Vec::new();
        for it in 0..200_000 {
            let var = hs.prior_variances();
            for (b, v) in beta.iter_mut().zip(&var) {
                *b = v.sqrt() * rng.sample::<f64, _>(StandardNormal);
            }
            hs.update(&beta, &mut rng).unwrap();
            if it % 20 == 0 {
                lambdas.push(hs.lambda_sq[1].sqrt());
            }
        }
        let ks = ks_statistic_cdf(&lambdas, |x| 2.0 / std::f64::consts::PI * x.atan());
        assert!(ks.p_value > 0.01, "{ks:?}");
    }
}
