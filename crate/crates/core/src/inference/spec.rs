use serde::{Deserialize, Serialize};

use crate::corr::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::priors::{HiwPrior, HorseshoeState, SigmaAlphaPrior, TauSharing};
use crate::samplers::{HmcConfig, ProposalMode};

/// Prior on the regression coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaPriorSpec {
    /// `N(0, v I)`; coefficients of individual-level covariates may get their
    /// own variance.
    Normal {
        #[serde(default = "default_beta_variance")]
        variance: f64,
        #[serde(default)]
        individual_variance: Option<f64>,
    },
    /// Horseshoe on every non-intercept coefficient; intercepts get a fixed
    /// normal prior.
    Horseshoe {
        #[serde(default)]
        tau: TauSharing,
        #[serde(default = "default_beta_variance")]
        intercept_variance: f64,
    },
}

fn default_beta_variance() -> f64 {
    100.0
}

impl Default for BetaPriorSpec {
    fn default() -> Self {
        Self::Normal {
            variance: default_beta_variance(),
            individual_variance: None,
        }
    }
}

/// Prior on `Σ_α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SigmaAlphaPriorSpec {
    /// `IW(df, s I)`; `df` defaults to `D + 1`.
    Iw {
        #[serde(default)]
        df: Option<f64>,
        #[serde(default = "one")]
        scale: f64,
    },
    /// Hierarchical inverse-Wishart with half-t(λ, A_i) standard deviations.
    /// A single scale is broadcast to every outcome.
    Hiw {
        #[serde(default = "two")]
        lambda: f64,
        scales: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

impl Default for SigmaAlphaPriorSpec {
    fn default() -> Self {
        Self::Iw { df: None, scale: 1.0 }
    }
}

impl SigmaAlphaPriorSpec {
    pub fn build(&self, dim: usize) -> Result<SigmaAlphaPrior> {
        match self {
            Self::Iw { df, scale } => {
                let df = df.unwrap_or(dim as f64 + 1.0);
                if !(df > dim as f64 - 1.0) || !(*scale > 0.0) {
                    return Err(Error::config(format!("inverse-Wishart prior needs df > D - 1 and scale > 0, got df = {df}")));
                }
                Ok(SigmaAlphaPrior::InverseWishart {
                    df,
                    scale: CovarianceMatrix::new(nalgebra::DMatrix::from_diagonal_element(dim, dim, *scale))?,
                })
            }
            Self::Hiw { lambda, scales } => {
                let scales = match scales.len() {
                    1 => vec![scales[0]; dim],
                    n if n == dim => scales.clone(),
                    n => return Err(Error::config(format!("HIW prior lists {n} scales for {dim} outcomes"))),
                };
                HiwPrior::new(*lambda, scales)
                    .map(SigmaAlphaPrior::Hierarchical)
                    .map_err(|e| Error::config(e.to_string()))
            }
        }
    }
}

/// Model definition independent of the data dimensions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub beta_prior: BetaPriorSpec,
    pub sigma_alpha_prior: SigmaAlphaPriorSpec,
    /// Degrees of freedom of the marginally uniform prior on `R_ε`;
    /// defaults to `D + 1`.
    pub corr_nu: Option<f64>,
    /// Use the individual-level covariates (the extended model).
    pub individual_covariates: bool,
    /// Also run the parameter-expansion sampler on the same data.
    pub include_px_comparison: bool,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match &self.beta_prior {
            BetaPriorSpec::Normal { variance, individual_variance } => {
                if !(*variance > 0.0) || individual_variance.is_some_and(|v| !(v > 0.0)) {
                    return Err(Error::config("beta prior variances must be positive"));
                }
            }
            BetaPriorSpec::Horseshoe { intercept_variance, .. } => {
                if !(*intercept_variance > 0.0) {
                    return Err(Error::config("intercept variance must be positive"));
                }
            }
        }
        if let Some(nu) = self.corr_nu {
            if !(nu > 0.0) {
                return Err(Error::config("corr_nu must be positive"));
            }
        }
        Ok(())
    }

    pub fn nu(&self, dim: usize) -> f64 {
        self.corr_nu.unwrap_or(dim as f64 + 1.0)
    }

    /// Prior variances of `β` (outcome-major) for `k` design columns, the
    /// last `individual` of which are individual-level covariates.
    pub(crate) fn beta_variances(&self, outcomes: usize, k: usize, individual: usize) -> Vec<f64> {
        match &self.beta_prior {
            BetaPriorSpec::Normal { variance, individual_variance } => (0..outcomes * k)
                .map(|j| match individual_variance {
                    Some(v) if j % k >= k - individual => *v,
                    _ => *variance,
                })
                .collect(),
            BetaPriorSpec::Horseshoe { intercept_variance, .. } => vec![*intercept_variance; outcomes * k],
        }
    }

    pub(crate) fn horseshoe(&self, outcomes: usize, k: usize) -> Option<HorseshoeState> {
        match self.beta_prior {
            BetaPriorSpec::Horseshoe { tau, intercept_variance } => {
                let mut hs = HorseshoeState::for_design(outcomes, k, tau);
                hs.unshrunk_variance = intercept_variance;
                Some(hs)
            }
            BetaPriorSpec::Normal { .. } => None,
        }
    }
}

/// Run-length, thinning, proposal and NUTS settings of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    /// Total sweeps, burn-in included.
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Move for `β` once switched on; independent draws before.
    pub beta_mode: ProposalMode,
    /// Move for the random effects once switched on.
    pub alpha_mode: ProposalMode,
    /// First sweep using the configured modes; defaults to the end of
    /// burn-in.
    pub switch_on: Option<usize>,
    pub hmc: HmcConfig,
    /// Keep the random-effect draws.
    pub store_alpha: bool,
    /// Keep `y*` for this many leading cells.
    pub store_latent_cells: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            iterations: 30_000,
            burn_in: 5_000,
            thin: 1,
            seed: 1,
            beta_mode: ProposalMode::Antithetic,
            alpha_mode: ProposalMode::Antithetic,
            switch_on: None,
            hmc: HmcConfig::default(),
            store_alpha: true,
            store_latent_cells: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(Error::config(format!(
                "burn-in ({}) must be smaller than the number of iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::config("thin must be at least 1"));
        }
        for m in [self.beta_mode, self.alpha_mode] {
            m.validate().map_err(|e| Error::config(e.to_string()))?;
        }
        self.hmc.validate()
    }

    pub fn switch_on(&self) -> usize {
        self.switch_on.unwrap_or(self.burn_in)
    }

    /// Number of stored draws.
    pub fn kept(&self) -> usize {
        (self.iterations - self.burn_in).div_ceil(self.thin)
    }

    /// `(β, α)` moves at sweep `it`.
    pub fn modes_at(&self, it: usize) -> (ProposalMode, ProposalMode) {
        if it >= self.switch_on() {
            (self.beta_mode, self.alpha_mode)
        } else {
            (ProposalMode::Independent, ProposalMode::Independent)
        }
    }
}
