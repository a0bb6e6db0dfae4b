//! Hierarchical inverse-Wishart prior: `Σ | a ~ IW(λ + D − 1, 2λ diag(1/a))`,
//! `a_i ~ IG(½, A_i⁻²)`, giving half-t(λ, A_i) standard deviations.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::wishart::{outer_sum, sample_inverse_wishart};
use super::inv_gamma;
use crate::corr::CovarianceMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HiwPrior {
    pub lambda: f64,
    pub scales: Vec<f64>,
    /// Auxiliary `a_i`, part of the Gibbs state.
    pub aux: Vec<f64>,
}

impl HiwPrior {
    pub fn new(lambda: f64, scales: Vec<f64>) -> Result<Self> {
        if !(lambda > 0.0) || scales.is_empty() || scales.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::arg("HIW prior needs lambda > 0 and positive finite scales"));
        }
        let aux = scales.iter().map(|a| a * a).collect();
        Ok(Self { lambda, scales, aux })
    }

    pub fn dim(&self) -> usize {
        self.scales.len()
    }

    fn iw_scale(&self, alphas: &[DVector<f64>]) -> DMatrix<f64> {
        let d = self.dim();
        let mut s = outer_sum(alphas, d);
        for i in 0..d {
            s[(i, i)] += 2.0 * self.lambda / self.aux[i];
        }
        s
    }

    /// Joint prior draw of `(a, Σ)`.
    pub fn sample_prior<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<CovarianceMatrix> {
        for (a, s) in self.aux.iter_mut().zip(&self.scales) {
            *a = inv_gamma(0.5, 1.0 / (s * s), rng);
        }
        let df = self.lambda + self.dim() as f64 - 1.0;
        sample_inverse_wishart(df, &CovarianceMatrix::new(self.iw_scale(&[]))?, rng)
    }
}

/// Blocked update: `a | Σ_α`, then `Σ_α | a, α`. The new `a` is written back
/// into `prior`.
pub fn hiw_update_sigma_alpha<R: Rng + ?Sized>(
    alphas: &[DVector<f64>],
    prior: &mut HiwPrior,
    current: &CovarianceMatrix,
    rng: &mut R,
) -> Result<CovarianceMatrix> {
    let d = prior.dim();
    if current.dim() != d || alphas.iter().any(|a| a.len() != d) {
        return Err(Error::arg("HIW update: dimension mismatch"));
    }
    let prec = current.inverse()?;
    let shape = (prior.lambda + d as f64) / 2.0;
    for i in 0..d {
        let rate = prior.lambda * prec[(i, i)] + 1.0 / (prior.scales[i] * prior.scales[i]);
        prior.aux[i] = inv_gamma(shape, rate, rng);
    }
    let df = prior.lambda + alphas.len() as f64 + d as f64 - 1.0;
    sample_inverse_wishart(df, &CovarianceMatrix::new(prior.iw_scale(alphas))?, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::ks::ks_statistic_cdf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    fn half_t_cdf(nu: f64, a: f64) -> impl Fn(f64) -> f64 {
        let t = StudentsT::new(0.0, a, nu).unwrap();
        move |x| if x <= 0.0 { 0.0 } else { 2.0 * t.cdf(x) - 1.0 }
    }

    #[test]
    fn prior_sd_is_half_t() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut p = HiwPrior::new(2.0, vec![0.46, 0.46]).unwrap();
        let mut sd0 = Vec::new();
        let mut sd1 = Vec::new();
        for _ in 0..20_000 {
            let s = p.sample_prior(&mut rng).unwrap();
            sd0.push(s.as_matrix()[(0, 0)].sqrt());
            sd1.push(s.as_matrix()[(1, 1)].sqrt());
        }
        let cdf = half_t_cdf(2.0, 0.46);
        assert!(ks_statistic_cdf(&sd0, &cdf).p_value > 0.01);
        assert!(ks_statistic_cdf(&sd1, &cdf).p_value > 0.01);
    }

    #[test]
    fn gibbs_chain_without_data_keeps_half_t() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut p = HiwPrior::new(2.0, vec![1.3]).unwrap();
        let mut sigma = CovarianceMatrix::identity(1);
        let mut sds = Vec::new();
        for it in 0..400_000 {
            sigma = hiw_update_sigma_alpha(&[], &mut p, &sigma, &mut rng).unwrap();
            if it % 20 == 0 {
                sds.push(sigma.as_matrix()[(0, 0)].sqrt());
            }
        }
        let ks = ks_statistic_cdf(&sds, half_t_cdf(2.0, 1.3));
        assert!(ks.p_value > 0.01, "{ks:?}");
    }

    #[test]
    fn rejects_bad_scales() {
        assert!(HiwPrior::new(2.0, vec![0.0]).is_err());
        assert!(HiwPrior::new(-1.0, vec![1.0]).is_err());
    }
}
