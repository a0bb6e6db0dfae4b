//! Parameter-expansion comparison sampler.
//!
//! The error correlation is expanded to a covariance `Σ_ε = 𝒟 R 𝒟` with a
//! working scale `𝒟 = diag(δ)`, the regression and covariance are drawn
//! jointly from a conjugate matrix-normal inverse-Wishart posterior, and the
//! result is rescaled back to a correlation matrix. The random effects are
//! scaled into the working parameterisation for the regression step only
//! and are not rescaled afterwards.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::chain::{base_meta, ChainDraws, IterationStats};
use super::gibbs::Gibbs;
use super::spec::{ModelSpec, SamplerConfig};
use crate::corr::{CovarianceMatrix, UnitCholesky};
use crate::data::PanelData;
use crate::error::{Error, Result};
use crate::priors::{inv_gamma, sample_inverse_wishart};
use crate::samplers::ProposalMode;

/// Working scales: `δ_i² ~ IG((D+1)/2, (R⁻¹)_ii / 2)`.
pub fn sample_expansion<R: Rng + ?Sized>(rinv: &DMatrix<f64>, rng: &mut R) -> Vec<f64> {
    let d = rinv.nrows();
    (0..d).map(|i| inv_gamma((d as f64 + 1.0) / 2.0, rinv[(i, i)] / 2.0, rng)).collect()
}

impl Gibbs {
    /// Prior variances of the columns of the matrix-normal prior `Γ | Σ_ε ~
    /// MN(0, V₀, Σ_ε)`, one per covariate.
    fn px_column_variances(&self) -> Vec<f64> {
        if let Some(hs) = &self.horseshoe {
            return vec![hs.unshrunk_variance; self.k];
        }
        (0..self.k)
            .map(|kk| (0..self.d).map(|dd| self.psi[dd * self.k + kk]).fold(0.0, f64::max))
            .collect()
    }

    /// Expansion, conjugate draw of `(γ, Σ_ε)` and rescaling.
    pub(super) fn update_px_regression<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let (d, k) = (self.d, self.k);
        let delta: Vec<f64> = sample_expansion(&self.rinv, rng).into_iter().map(f64::sqrt).collect();
        let mut xty = DMatrix::<f64>::zeros(k, d);
        let mut yty = DMatrix::<f64>::zeros(d, d);
        let mut y = DVector::<f64>::zeros(d);
        for c in 0..self.data.cells() {
            let i = c / self.t;
            for dd in 0..d {
                self.state.latent[c * d + dd] *= delta[dd];
                y[dd] = self.state.latent[c * d + dd] - delta[dd] * self.state.alpha[i * d + dd];
            }
            let x = DVector::from_column_slice(self.data.x_cell(c));
            xty.ger(1.0, &x, &y, 1.0);
            yty.ger(1.0, &y, &y, 1.0);
        }
        let mut vinv = self.gram.clone();
        for (kk, v) in self.px_column_variances().iter().enumerate() {
            vinv[(kk, kk)] += 1.0 / v;
        }
        let chol = vinv.cholesky().ok_or(Error::NotPositiveDefinite("expanded regression precision"))?;
        let mn = chol.solve(&xty);
        let sn = DMatrix::identity(d, d) + yty - mn.transpose() * &xty;
        let sn = CovarianceMatrix::new((&sn + sn.transpose()) * 0.5)?;
        let sigma = sample_inverse_wishart((d + 1 + self.data.cells()) as f64, &sn, rng)?;
        let z = DMatrix::from_fn(k, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let noise = chol
            .l()
            .tr_solve_lower_triangular(&(z * sigma.cholesky()?.l().transpose()))
            .ok_or(Error::Singular("expanded regression factor"))?;
        let gamma = mn + noise;

        let scale: Vec<f64> = sigma.diagonal().iter().map(|v| 1.0 / v.sqrt()).collect();
        for dd in 0..d {
            for kk in 0..k {
                self.state.beta[dd * k + kk] = scale[dd] * gamma[(kk, dd)];
            }
        }
        for c in 0..self.data.cells() {
            for dd in 0..d {
                self.state.latent[c * d + dd] *= scale[dd];
            }
        }
        if self.state.beta.iter().chain(&self.state.latent).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("expanded regression draw"));
        }
        let r = sigma.to_correlation();
        self.state.l = UnitCholesky::from_correlation(&r)?;
        self.set_corr(r)?;
        self.refresh_bx();
        Ok(())
    }

    /// One expanded sweep: latents, random effects, `Σ_α`, then the
    /// expanded regression.
    pub fn px_sweep<R: Rng + ?Sized>(&mut self, alpha_mode: ProposalMode, rng: &mut R) -> Result<()> {
        self.update_latents(rng)?;
        self.update_alpha(alpha_mode, rng)?;
        self.update_sigma_alpha(rng)?;
        self.update_px_regression(rng)
    }
}

/// Run the parameter-expansion sampler with the same storage layout as
/// [`run_chain`](super::run_chain). Random effects are always drawn
/// independently: reflecting them about a conditional mean that the
/// unrescaled expansion keeps shifting lets `α` and `Σ_α` run away.
pub fn run_px_chain(data: &PanelData, spec: &ModelSpec, cfg: &SamplerConfig) -> Result<ChainDraws> {
    cfg.validate()?;
    let mut g = Gibbs::new(data, spec, cfg.hmc.clone())?;
    if cfg.store_latent_cells > g.data().cells() {
        return Err(Error::config("store_latent_cells exceeds the number of cells"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draws = ChainDraws::empty(base_meta("px", &g, spec, cfg), cfg.store_alpha, cfg.store_latent_cells);
    let start = Instant::now();
    for it in 0..cfg.iterations {
        let t0 = Instant::now();
        g.px_sweep(ProposalMode::Independent, &mut rng)?;
        draws.timings.push(t0.elapsed().as_secs_f64());
        if it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0 {
            let s = g.state();
            draws.record(&s.beta, s.l.entries(), &s.r, &s.sigma_alpha, &s.alpha, &s.latent, IterationStats::default());
        }
    }
    let total = start.elapsed().as_secs_f64();
    draws.meta.seconds_total = total;
    draws.meta.seconds_per_iteration = total / cfg.iterations as f64;
    Ok(draws)
}
