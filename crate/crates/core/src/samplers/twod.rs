//! Componentwise Gibbs sampling of a fixed multivariate normal, each margin
//! refreshed by its own [`ProposalMode`].

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::gaussian::{antithetic_step, ensure_stochastic, exact_gauss_hmc, over_relax_with, ProposalMode};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GaussianGibbs {
    mean: Vec<f64>,
    precision: DMatrix<f64>,
    modes: Vec<ProposalMode>,
}

impl GaussianGibbs {
    pub fn new(mean: Vec<f64>, cov: &DMatrix<f64>, modes: Vec<ProposalMode>) -> Result<Self> {
        let n = mean.len();
        if cov.nrows() != n || cov.ncols() != n || modes.len() != n {
            return Err(Error::arg("GaussianGibbs: dimension mismatch"));
        }
        for m in &modes {
            m.validate()?;
        }
        ensure_stochastic(&modes)?;
        let precision = cov
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite("target covariance"))?
            .inverse();
        Ok(Self { mean, precision, modes })
    }

    /// Update each margin in turn given the others.
    pub fn sweep<R: Rng + ?Sized>(&self, theta: &mut [f64], rng: &mut R) {
        for d in 0..theta.len() {
            let (mu, sd) = super::conditional_from_precision(&self.mean, &self.precision, d, theta);
            theta[d] = match self.modes[d] {
                ProposalMode::Independent => mu + sd * rng.sample::<f64, _>(StandardNormal),
                ProposalMode::Antithetic => antithetic_step(&[theta[d]], &[mu])[0],
                ProposalMode::OverRelax { kappa } => {
                    over_relax_with(theta[d], mu, sd, kappa, rng.sample::<f64, _>(StandardNormal))
                }
                ProposalMode::ExactGaussHmc { t } => {
                    // momentum for a 1-D Gaussian of variance sd² has variance 1/sd²
                    let u = rng.sample::<f64, _>(StandardNormal) / sd;
                    exact_gauss_hmc(&[theta[d]], &[u], t, &[mu], &DMatrix::from_element(1, 1, sd * sd))[0]
                }
            };
        }
    }

    /// `n` sweeps from `start`; returns every state after each sweep.
    pub fn run<R: Rng + ?Sized>(&self, start: &[f64], n: usize, rng: &mut R) -> Vec<Vec<f64>> {
        let mut theta = start.to_vec();
        (0..n)
            .map(|_| {
                self.sweep(&mut theta, rng);
                theta.clone()
            })
            .collect()
    }

    pub fn mean(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.mean)
    }
}
