//! Priors on `R_ε`, `Σ_α` and `β`, with their conjugate Gibbs updates.

mod hiw;
mod horseshoe;
mod study;
mod wishart;

pub use hiw::{hiw_update_sigma_alpha, HiwPrior};
pub use horseshoe::{HorseshoeState, TauSharing, INTERCEPT_VARIANCE};
pub use study::{pearson, Dependence, MarginalFit, PriorStudy, PriorStudySummary};
pub use wishart::{iw_update_sigma_alpha, outer_sum, sample_corr_marg_uniform, sample_inverse_wishart};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::corr::CovarianceMatrix;
use crate::error::{Error, Result};

/// `IG(shape, scale)` draw: `scale / Gamma(shape, 1)`.
pub fn inv_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    let g = Gamma::new(shape, 1.0).expect("inverse-gamma shape must be positive");
    scale / g.sample(rng)
}

/// Gaussian prior `N(mean, Ψ)` on the regression coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalPrior {
    pub mean: DVector<f64>,
    pub cov: CovarianceMatrix,
}

impl NormalPrior {
    pub fn new(mean: DVector<f64>, cov: CovarianceMatrix) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(Error::arg("prior mean and covariance disagree in size"));
        }
        Ok(Self { mean, cov })
    }

    /// `N(0, v I)`.
    pub fn isotropic(n: usize, variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(Error::arg("prior variance must be positive"));
        }
        let cov = CovarianceMatrix::new(DMatrix::from_diagonal_element(n, n, variance))?;
        Ok(Self { mean: DVector::zeros(n), cov })
    }

    pub fn diagonal(variances: &[f64]) -> Result<Self> {
        if variances.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::arg("prior variances must be positive"));
        }
        let n = variances.len();
        let cov = CovarianceMatrix::new(DMatrix::from_diagonal(&DVector::from_column_slice(variances)))?;
        Ok(Self { mean: DVector::zeros(n), cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Which prior governs `β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaPriorKind {
    #[default]
    Normal,
    Horseshoe,
}

/// Prior on the random-effect covariance.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaAlphaPrior {
    InverseWishart { df: f64, scale: CovarianceMatrix },
    Hierarchical(HiwPrior),
}

impl SigmaAlphaPrior {
    /// Draw `Σ_α` (and, for HIW, the auxiliaries) from the prior.
    pub fn sample_prior<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<CovarianceMatrix> {
        match self {
            Self::InverseWishart { df, scale } => sample_inverse_wishart(*df, scale, rng),
            Self::Hierarchical(h) => h.sample_prior(rng),
        }
    }

    /// Conditional draw given the random effects and the current `Σ_α`.
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        alphas: &[DVector<f64>],
        current: &CovarianceMatrix,
        rng: &mut R,
    ) -> Result<CovarianceMatrix> {
        match self {
            Self::InverseWishart { df, scale } => iw_update_sigma_alpha(alphas, *df, scale, rng),
            Self::Hierarchical(h) => hiw_update_sigma_alpha(alphas, h, current, rng),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::InverseWishart { scale, .. } => scale.dim(),
            Self::Hierarchical(h) => h.dim(),
        }
    }
}
