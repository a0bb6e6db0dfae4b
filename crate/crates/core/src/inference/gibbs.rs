//! The blocked Gibbs sampler: latents, coefficients, error correlation,
//! random effects and their covariance, in that order.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::spec::ModelSpec;
use crate::corr::{CorrTarget, CorrelationMatrix, CovarianceMatrix, UnitCholesky};
use crate::data::PanelData;
use crate::error::{Error, Result};
use crate::priors::{sample_corr_marg_uniform, HorseshoeState, SigmaAlphaPrior};
use crate::samplers::{
    block_move_with, conditional_from_precision, sample_truncated_normal, HmcConfig, Nuts, ProposalMode, TransitionInfo,
};

/// Full sampler state. Arrays are individual-major:
/// `latent[c D + d]` with `c = i T + t`, `alpha[i D + d]`, `beta[d K + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamState {
    pub latent: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub l: UnitCholesky,
    pub r: CorrelationMatrix,
    pub sigma_alpha: CovarianceMatrix,
}

impl ParamState {
    pub fn alpha_row(&self, i: usize, d: usize) -> &[f64] {
        &self.alpha[i * d..(i + 1) * d]
    }
}

fn std_normal_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// `N(0, (U Uᵀ)⁻¹)` draw from the lower Cholesky factor `U` of a precision.
fn precision_noise<R: Rng + ?Sized>(u: &DMatrix<f64>, rng: &mut R) -> Vec<f64> {
    let z = std_normal_vec(u.nrows(), rng);
    u.tr_solve_lower_triangular(&z).expect("Cholesky factor has a positive diagonal").as_slice().to_vec()
}

/// Gibbs engine over one panel. Owns the (possibly augmented) data, the
/// prior state and the NUTS kernel for the correlation block.
#[derive(Debug, Clone)]
pub struct Gibbs {
    pub(super) data: PanelData,
    pub(super) d: usize,
    pub(super) k: usize,
    pub(super) p: usize,
    pub(super) t: usize,
    pub(super) gram: DMatrix<f64>,
    pub(super) nu: f64,
    pub(super) psi: Vec<f64>,
    pub(super) horseshoe: Option<HorseshoeState>,
    pub(super) sigma_prior: SigmaAlphaPrior,
    pub(super) nuts: Nuts,
    pub(super) state: ParamState,
    pub(super) rinv: DMatrix<f64>,
    pub(super) bx: Vec<f64>,
    pub(super) alpha_noise_scale: f64,
}

impl Gibbs {
    /// Start at `β = 0`, `α = 0`, `R = I`, `Σ_α = I`, latents `±½`.
    pub fn new(data: &PanelData, spec: &ModelSpec, hmc: HmcConfig) -> Result<Self> {
        spec.validate()?;
        let individual = if spec.individual_covariates { data.individual_covariates() } else { 0 };
        if spec.individual_covariates && individual == 0 {
            return Err(Error::config("the extended model needs individual-level covariates in the data"));
        }
        let data = if individual > 0 { data.augmented() } else { data.clone() };
        let (d, k, p, t) = (data.outcomes(), data.covariates(), data.individuals(), data.periods());
        let mut gram = DMatrix::zeros(k, k);
        for c in 0..data.cells() {
            let x = DVector::from_column_slice(data.x_cell(c));
            gram.ger(1.0, &x, &x, 1.0);
        }
        let sigma_prior = spec.sigma_alpha_prior.build(d)?;
        let latent = data.y().iter().map(|&y| if y == 1 { 0.5 } else { -0.5 }).collect();
        let state = ParamState {
            latent,
            alpha: vec![0.0; p * d],
            beta: vec![0.0; d * k],
            l: UnitCholesky::identity(d),
            r: CorrelationMatrix::identity(d),
            sigma_alpha: CovarianceMatrix::identity(d),
        };
        let mut g = Self {
            d,
            k,
            p,
            t,
            gram,
            nu: spec.nu(d),
            psi: spec.beta_variances(d, k, individual),
            horseshoe: spec.horseshoe(d, k),
            sigma_prior,
            nuts: Nuts::new(hmc)?,
            rinv: DMatrix::identity(d, d),
            bx: vec![0.0; data.cells() * d],
            state,
            data,
            alpha_noise_scale: 1.0,
        };
        if let Some(hs) = &g.horseshoe {
            g.psi = hs.prior_variances();
        }
        Ok(g)
    }

    pub fn state(&self) -> &ParamState {
        &self.state
    }

    pub fn data(&self) -> &PanelData {
        &self.data
    }

    /// Current prior variances of `β`.
    pub fn beta_prior_variances(&self) -> &[f64] {
        &self.psi
    }

    pub fn horseshoe(&self) -> Option<&HorseshoeState> {
        self.horseshoe.as_ref()
    }

    pub fn sigma_alpha_prior(&self) -> &SigmaAlphaPrior {
        &self.sigma_prior
    }

    pub fn nuts(&self) -> &Nuts {
        &self.nuts
    }

    pub fn finish_adaptation(&mut self) {
        self.nuts.finish_adaptation();
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Replace the coefficient and correlation blocks, e.g. with known
    /// values. Latents and random effects are left alone.
    pub fn set_parameters(&mut self, beta: Vec<f64>, r: CorrelationMatrix, sigma_alpha: CovarianceMatrix) -> Result<()> {
        if beta.len() != self.d * self.k || r.dim() != self.d || sigma_alpha.dim() != self.d {
            return Err(Error::arg("parameter shapes do not match the model"));
        }
        self.state.l = UnitCholesky::from_correlation(&r)?;
        self.state.beta = beta;
        self.set_corr(r)?;
        self.state.sigma_alpha = sigma_alpha;
        self.refresh_bx();
        Ok(())
    }

    /// Multiplies the conditional covariance of the random effects by
    /// `factor`. Only for checking that the correctness test catches it.
    #[doc(hidden)]
    pub fn corrupt_alpha_variance(&mut self, factor: f64) {
        self.alpha_noise_scale = factor.sqrt();
    }

    pub(super) fn set_corr(&mut self, r: CorrelationMatrix) -> Result<()> {
        self.rinv = r.inverse()?;
        self.state.r = r;
        Ok(())
    }

    pub(super) fn refresh_bx(&mut self) {
        let (d, k) = (self.d, self.k);
        for c in 0..self.data.cells() {
            let x = self.data.x_cell(c);
            for dd in 0..d {
                let b = &self.state.beta[dd * k..(dd + 1) * k];
                self.bx[c * d + dd] = b.iter().zip(x).map(|(b, x)| b * x).sum();
            }
        }
    }

    /// Latents: each `y*_{d,it}` from its univariate conditional given the
    /// other outcomes of the cell, truncated to the side fixed by `y_{d,it}`.
    pub fn update_latents<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let d = self.d;
        let mut mu = vec![0.0; d];
        for c in 0..self.data.cells() {
            let a = &self.state.alpha[(c / self.t) * d..(c / self.t + 1) * d];
            for dd in 0..d {
                mu[dd] = a[dd] + self.bx[c * d + dd];
            }
            let y = self.data.y_cell(c);
            let cell = &mut self.state.latent[c * d..(c + 1) * d];
            for dd in 0..d {
                let (m, s) = conditional_from_precision(&mu, &self.rinv, dd, cell);
                let (lo, hi) = if y[dd] == 1 { (0.0, f64::INFINITY) } else { (f64::NEG_INFINITY, 0.0) };
                cell[dd] = sample_truncated_normal(m, s, lo, hi, rng)?;
            }
        }
        Ok(())
    }

    /// Coefficients: `N(μ_β, Σ_β)` with precision `R⁻¹ ⊗ Σ x xᵀ + Ψ⁻¹`, then
    /// the horseshoe scales given the new `β`.
    pub fn update_beta<R: Rng + ?Sized>(&mut self, mode: ProposalMode, rng: &mut R) -> Result<()> {
        let (d, k) = (self.d, self.k);
        let n = d * k;
        let mut h = DMatrix::<f64>::zeros(d, k);
        for c in 0..self.data.cells() {
            let i = c / self.t;
            let x = self.data.x_cell(c);
            for dd in 0..d {
                let e = self.state.latent[c * d + dd] - self.state.alpha[i * d + dd];
                for (kk, xv) in x.iter().enumerate() {
                    h[(dd, kk)] += e * xv;
                }
            }
        }
        let rhs_m = &self.rinv * h;
        let mut prec = DMatrix::<f64>::zeros(n, n);
        for a in 0..d {
            for b in 0..d {
                let w = self.rinv[(a, b)];
                for kk in 0..k {
                    for ll in 0..k {
                        prec[(a * k + kk, b * k + ll)] = w * self.gram[(kk, ll)];
                    }
                }
            }
        }
        for (j, v) in self.psi.iter().enumerate() {
            prec[(j, j)] += 1.0 / v;
        }
        let rhs = DVector::from_fn(n, |j, _| rhs_m[(j / k, j % k)]);
        let chol = prec.cholesky().ok_or(Error::NotPositiveDefinite("coefficient posterior precision"))?;
        let mu = chol.solve(&rhs);
        let u = chol.l();
        self.state.beta = block_move_with(&self.state.beta, mu.as_slice(), mode, || precision_noise(&u, rng));
        if self.state.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("coefficient draw"));
        }
        if let Some(hs) = self.horseshoe.as_mut() {
            self.psi = hs.update(&self.state.beta, rng)?;
        }
        self.refresh_bx();
        Ok(())
    }

    /// Residuals `y* − α − B x` collected into a correlation target.
    pub fn corr_target(&self) -> Result<CorrTarget> {
        let d = self.d;
        let mut s = DMatrix::<f64>::zeros(d, d);
        let mut e = DVector::<f64>::zeros(d);
        for c in 0..self.data.cells() {
            let i = c / self.t;
            for dd in 0..d {
                e[dd] = self.state.latent[c * d + dd] - self.state.alpha[i * d + dd] - self.bx[c * d + dd];
            }
            s.ger(1.0, &e, &e, 1.0);
        }
        CorrTarget::from_scatter(self.data.cells(), s, self.nu)
    }

    /// One NUTS transition on the free Cholesky entries.
    pub fn update_corr<R: Rng + ?Sized>(&mut self, adapt: bool, rng: &mut R) -> Result<TransitionInfo> {
        let d = self.d;
        if d < 2 {
            return Ok(TransitionInfo::default());
        }
        let target = self.corr_target()?;
        let mut f = |th: &[f64]| -> Result<(f64, Vec<f64>)> {
            let l = UnitCholesky::new(d, th.to_vec())?;
            target.log_density_and_gradient(&l)
        };
        let theta = self.nuts.transition(self.state.l.entries(), &mut f, adapt, rng)?;
        self.state.l = UnitCholesky::new(d, theta)?;
        let r = self.state.l.to_correlation();
        self.set_corr(r)?;
        Ok(self.nuts.last())
    }

    /// Random effects: `α_i ~ N(μ_i, Σ̃)`, `Σ̃ = (T R⁻¹ + Σ_α⁻¹)⁻¹`,
    /// `μ_i = Σ̃ R⁻¹ Σ_t (y*_it − B x_it)`.
    pub fn update_alpha<R: Rng + ?Sized>(&mut self, mode: ProposalMode, rng: &mut R) -> Result<()> {
        let d = self.d;
        let prec = &self.rinv * self.t as f64 + self.state.sigma_alpha.inverse()?;
        let chol = prec.cholesky().ok_or(Error::NotPositiveDefinite("random-effect posterior precision"))?;
        let u = chol.l();
        let scale = self.alpha_noise_scale;
        for i in 0..self.p {
            let mut s = DVector::<f64>::zeros(d);
            for t in 0..self.t {
                let c = i * self.t + t;
                for dd in 0..d {
                    s[dd] += self.state.latent[c * d + dd] - self.bx[c * d + dd];
                }
            }
            let mu = chol.solve(&(&self.rinv * s));
            let cur = &self.state.alpha[i * d..(i + 1) * d];
            let next = block_move_with(cur, mu.as_slice(), mode, || {
                precision_noise(&u, rng).into_iter().map(|v| v * scale).collect()
            });
            self.state.alpha[i * d..(i + 1) * d].copy_from_slice(&next);
        }
        if self.state.alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("random-effect draw"));
        }
        Ok(())
    }

    pub fn alphas(&self) -> Vec<DVector<f64>> {
        self.state.alpha.chunks(self.d).map(DVector::from_column_slice).collect()
    }

    /// `Σ_α` (and HIW auxiliaries) from the conjugate conditional.
    pub fn update_sigma_alpha<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let alphas = self.alphas();
        self.state.sigma_alpha = self.sigma_prior.update(&alphas, &self.state.sigma_alpha, rng)?;
        Ok(())
    }

    /// One full sweep.
    pub fn sweep<R: Rng + ?Sized>(
        &mut self,
        beta_mode: ProposalMode,
        alpha_mode: ProposalMode,
        adapt: bool,
        rng: &mut R,
    ) -> Result<TransitionInfo> {
        self.update_latents(rng)?;
        self.update_beta(beta_mode, rng)?;
        let info = self.update_corr(adapt, rng)?;
        self.update_alpha(alpha_mode, rng)?;
        self.update_sigma_alpha(rng)?;
        Ok(info)
    }

    /// Draw every parameter from its prior, then the latents and outcomes
    /// from the model.
    pub fn draw_from_prior<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let d = self.d;
        if let Some(hs) = self.horseshoe.as_mut() {
            hs.sample_prior(rng);
            self.psi = hs.prior_variances();
        }
        for (b, v) in self.state.beta.iter_mut().zip(&self.psi) {
            *b = v.sqrt() * rng.sample::<f64, _>(StandardNormal);
        }
        let r = sample_corr_marg_uniform(d, self.nu, rng)?;
        self.state.l = UnitCholesky::from_correlation(&r)?;
        self.set_corr(r)?;
        self.state.sigma_alpha = self.sigma_prior.sample_prior(rng)?;
        let la = self.state.sigma_alpha.cholesky()?.l();
        for i in 0..self.p {
            let a = &la * std_normal_vec(d, rng);
            self.state.alpha[i * d..(i + 1) * d].copy_from_slice(a.as_slice());
        }
        self.refresh_bx();
        self.simulate_outcomes(rng)
    }

    /// New `y*` and `y` from the model at the current parameters.
    pub fn simulate_outcomes<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let d = self.d;
        let lr = self.state.r.cholesky()?.l();
        let mut y = Vec::with_capacity(self.state.latent.len());
        for c in 0..self.data.cells() {
            let i = c / self.t;
            let e = &lr * std_normal_vec(d, rng);
            for dd in 0..d {
                let v = self.state.alpha[i * d + dd] + self.bx[c * d + dd] + e[dd];
                self.state.latent[c * d + dd] = v;
                y.push(u8::from(v > 0.0));
            }
        }
        self.data.set_outcomes(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::INTERCEPT;
    use crate::inference::spec::{BetaPriorSpec, SigmaAlphaPriorSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn panel(p: usize, t: usize, d: usize, k: usize, seed: u64) -> PanelData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells = p * t;
        let y = (0..cells * d).map(|_| rng.random_range(0..2u8)).collect();
        let x = (0..cells * k).map(|j| if j % k == 0 { 1.0 } else { rng.sample(StandardNormal) }).collect();
        let names = std::iter::once(INTERCEPT.to_string()).chain((1..k).map(|j| format!("x{j}"))).collect();
        PanelData::new(p, t, (0..d).map(|j| format!("y{j}")).collect(), names, y, x).unwrap()
    }

    #[test]
    fn signs_consistent_after_every_sweep() {
        let data = panel(6, 3, 3, 2, 1);
        let mut g = Gibbs::new(&data, &ModelSpec::default(), HmcConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for it in 0..50 {
            let mode = if it % 2 == 0 { ProposalMode::Independent } else { ProposalMode::Antithetic };
            g.sweep(mode, mode, it < 25, &mut rng).unwrap();
            for (v, y) in g.state().latent.iter().zip(g.data().y()) {
                assert_eq!(*y == 1, *v > 0.0);
            }
            CorrelationMatrix::new(g.state().r.as_matrix().clone()).unwrap();
            g.state().sigma_alpha.cholesky().unwrap();
        }
    }

    #[test]
    fn univariate_augmentation_is_half_normal() {
        // D = 1, β ≡ 0, no random effects to speak of: y* | y = 1 is N(0,1) on (0, ∞)
        let data = PanelData::new(1, 200, vec!["y".into()], vec![INTERCEPT.into()], vec![1; 200], vec![1.0; 200]).unwrap();
        let mut g = Gibbs::new(&data, &ModelSpec::default(), HmcConfig::default()).unwrap();
        g.set_parameters(vec![0.0], CorrelationMatrix::identity(1), CovarianceMatrix::identity(1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sum = 0.0;
        let reps = 1000;
        for _ in 0..reps {
            g.update_latents(&mut rng).unwrap();
            sum += g.state().latent.iter().sum::<f64>();
        }
        let mean = sum / (reps * 200) as f64;
        assert!((mean - 0.7978845608028654).abs() < 0.005, "{mean}");
    }

    #[test]
    fn prior_only_coefficients() {
        // no individuals: μ_β = 0, Σ_β = Ψ, and the antithetic move negates β
        let data = PanelData::new(0, 1, vec!["a".into(), "b".into()], vec![INTERCEPT.into()], vec![], vec![]).unwrap();
        let mut g = Gibbs::new(&data, &ModelSpec::default(), HmcConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        g.update_beta(ProposalMode::Independent, &mut rng).unwrap();
        let b = g.state().beta.clone();
        g.update_beta(ProposalMode::Antithetic, &mut rng).unwrap();
        assert_eq!(g.state().beta, b.iter().map(|v| -v).collect::<Vec<_>>());
        let n = 20_000;
        let mut ss = 0.0;
        for _ in 0..n {
            g.update_beta(ProposalMode::Independent, &mut rng).unwrap();
            ss += g.state().beta[0].powi(2);
        }
        let var = ss / n as f64;
        assert!((var - 100.0).abs() < 5.0, "{var}");
    }

    #[test]
    fn single_observation_regression() {
        // D = K = 1, one cell with y* = 1.3, α = 0: β | y* ~ N(v y*/(v + 1), v/(v + 1))
        let data = PanelData::new(1, 1, vec!["y".into()], vec![INTERCEPT.into()], vec![1], vec![1.0]).unwrap();
        let spec = ModelSpec {
            beta_prior: BetaPriorSpec::Normal {
                variance: 4.0,
                individual_variance: None,
            },
            ..Default::default()
        };
        let mut g = Gibbs::new(&data, &spec, HmcConfig::default()).unwrap();
        g.state.latent[0] = 1.3;
        g.state.beta = vec![0.25];
        g.update_beta(ProposalMode::Antithetic, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let mu = 4.0 * 1.3 / 5.0;
        assert!((g.state().beta[0] - (2.0 * mu - 0.25)).abs() < 1e-12);
    }

    #[test]
    fn random_effect_mean_identity_case() {
        // R = I, Σ_α = I, T = 1: Σ̃ = ½ I and μ_i = ½ (y*_i1 − B x_i1)
        let data = panel(3, 1, 2, 1, 9);
        let mut g = Gibbs::new(&data, &ModelSpec::default(), HmcConfig::default()).unwrap();
        g.set_parameters(vec![0.3, -0.2], CorrelationMatrix::identity(2), CovarianceMatrix::identity(2)).unwrap();
        g.state.alpha = vec![0.0; 6];
        g.update_alpha(ProposalMode::Antithetic, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        for i in 0..3 {
            for dd in 0..2 {
                let resid = g.state.latent[i * 2 + dd] - [0.3, -0.2][dd];
                // antithetic from 0 lands on 2 μ
                assert!((g.state.alpha[i * 2 + dd] - resid).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vague_random_effect_prior_gives_period_average() {
        let data = panel(2, 4, 2, 1, 5);
        let mut g = Gibbs::new(&data, &ModelSpec::default(), HmcConfig::default()).unwrap();
        let big = CovarianceMatrix::new(DMatrix::from_diagonal_element(2, 2, 1e12)).unwrap();
        let r = CorrelationMatrix::new(nalgebra::dmatrix![1.0, 0.4; 0.4, 1.0]).unwrap();
        g.set_parameters(vec![0.1, 0.2], r, big).unwrap();
        g.state.alpha = vec![0.0; 4];
        g.update_alpha(ProposalMode::Antithetic, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        for i in 0..2 {
            for dd in 0..2 {
                let avg = (0..4).map(|t| g.state.latent[(i * 4 + t) * 2 + dd] - [0.1, 0.2][dd]).sum::<f64>() / 4.0;
                assert!((g.state.alpha[i * 2 + dd] / 2.0 - avg).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn antithetic_random_effects_are_an_involution() {
        let data = panel(4, 2, 2, 1, 6);
        let mut g = Gibbs::new(&data, &ModelSpec::default(), HmcConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        g.sweep(ProposalMode::Independent, ProposalMode::Independent, false, &mut rng).unwrap();
        // round α to a dyadic grid so 2μ − α carries no rounding
        for a in g.state.alpha.iter_mut() {
            *a = (*a * 64.0).round() / 64.0;
        }
        let before = g.state.alpha.clone();
        g.update_alpha(ProposalMode::Antithetic, &mut rng).unwrap();
        g.update_alpha(ProposalMode::Antithetic, &mut rng).unwrap();
        for (a, b) in g.state.alpha.iter().zip(&before) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn correlation_recovered_from_strong_residuals() {
        // residuals with correlation 0.9 and n = 2000; the L-chain mean of r should be near 0.9
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let r = nalgebra::dmatrix![1.0, 0.9; 0.9, 1.0];
        let lr = r.clone().cholesky().unwrap().l();
        let n = 2000;
        let mut s = DMatrix::zeros(2, 2);
        for _ in 0..n {
            let e = &lr * std_normal_vec(2, &mut rng);
            s.ger(1.0, &e, &e, 1.0);
        }
        let target = CorrTarget::from_scatter(n, s, 3.0).unwrap();
        let mut nuts = Nuts::new(HmcConfig::default()).unwrap();
        let mut f = |th: &[f64]| target.log_density_and_gradient(&UnitCholesky::new(2, th.to_vec())?);
        let mut th = vec![0.0];
        let mut acc = 0.0;
        for it in 0..3000 {
            if it == 500 {
                nuts.finish_adaptation();
            }
            th = nuts.transition(&th, &mut f, it < 500, &mut rng).unwrap();
            if it >= 500 {
                acc += UnitCholesky::new(2, th.clone()).unwrap().to_correlation().get(1, 0);
            }
        }
        let mean = acc / 2500.0;
        assert!((mean - 0.9).abs() < 0.05, "{mean}");
    }

    #[test]
    fn horseshoe_and_hiw_run() {
        let data = panel(5, 2, 2, 3, 7);
        let spec = ModelSpec {
            beta_prior: BetaPriorSpec::Horseshoe {
                tau: Default::default(),
                intercept_variance: 100.0,
            },
            sigma_alpha_prior: SigmaAlphaPriorSpec::Hiw {
                lambda: 2.0,
                scales: vec![0.5],
            },
            ..Default::default()
        };
        let mut g = Gibbs::new(&data, &spec, HmcConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..30 {
            g.sweep(ProposalMode::Independent, ProposalMode::Antithetic, true, &mut rng).unwrap();
        }
        let psi = g.beta_prior_variances();
        assert_eq!(psi[0], 100.0);
        assert_eq!(psi[3], 100.0);
        assert!(psi.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn extended_model_requires_individual_covariates() {
        let data = panel(2, 2, 2, 1, 1);
        let spec = ModelSpec {
            individual_covariates: true,
            ..Default::default()
        };
        assert!(Gibbs::new(&data, &spec, HmcConfig::default()).unwrap_err().is_config_error());
    }
}
