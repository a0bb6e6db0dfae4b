use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{paper, CodebookSpec, PanelData, INTERCEPT};
use crate::corr::{symmetric_from_vechl, CorrelationMatrix, CovarianceMatrix};
use crate::error::{Error, Result};

/// Data-generating parameters `(β, R_ε, Σ_α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrueParams {
    pub outcomes: Vec<String>,
    pub covariates: Vec<String>,
    /// Outcome-major: `beta[d K + k]`.
    pub beta: Vec<f64>,
    /// Strict lower triangle of `R_ε`, row-major.
    pub r_eps: Vec<f64>,
    /// Rows of `Σ_α`.
    pub sigma_alpha: Vec<Vec<f64>>,
}

impl TrueParams {
    pub fn outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn covariates(&self) -> usize {
        self.covariates.len()
    }

    /// Check shapes and definiteness; returns `(R_ε, Σ_α)`.
    pub fn matrices(&self) -> Result<(CorrelationMatrix, CovarianceMatrix)> {
        let (d, k) = (self.outcomes(), self.covariates());
        if d == 0 || k == 0 || self.beta.len() != d * k {
            return Err(Error::arg(format!("beta has {} entries, expected D K = {}", self.beta.len(), d * k)));
        }
        if self.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("beta"));
        }
        let r = CorrelationMatrix::new(symmetric_from_vechl(d, &self.r_eps, 1.0)?)?;
        if self.sigma_alpha.len() != d || self.sigma_alpha.iter().any(|row| row.len() != d) {
            return Err(Error::arg("sigma_alpha must be D x D"));
        }
        let s = CovarianceMatrix::new(DMatrix::from_fn(d, d, |i, j| self.sigma_alpha[i][j]))?;
        Ok((r, s))
    }

    /// Posterior means of the eight-product, 27-covariate survey model.
    pub fn paper() -> Self {
        let d = paper::PRODUCTS.len();
        let k = paper::COVARIATES.len();
        let beta = (0..d * k).map(|j| paper::BETA[j % k][j / k]).collect();
        let lower = symmetric_from_vechl(d, &paper::SIGMA_ALPHA_COV, 0.0).expect("table shape");
        let sigma_alpha = (0..d)
            .map(|i| (0..d).map(|j| if i == j { paper::SIGMA_ALPHA_VAR[i] } else { lower[(i, j)] }).collect())
            .collect();
        Self {
            outcomes: paper::PRODUCTS.iter().map(|s| s.to_string()).collect(),
            covariates: paper::COVARIATES.iter().map(|s| s.to_string()).collect(),
            beta,
            r_eps: paper::R_EPS.to_vec(),
            sigma_alpha,
        }
    }

    /// The survey model restricted to its first `d` products.
    pub fn paper_subset(d: usize) -> Result<Self> {
        let full = Self::paper();
        let (dd, k) = (full.outcomes(), full.covariates());
        if d == 0 || d > dd {
            return Err(Error::arg(format!("the survey model has {dd} outcomes, asked for {d}")));
        }
        let lower_len = d * (d - 1) / 2;
        Ok(Self {
            outcomes: full.outcomes[..d].to_vec(),
            covariates: full.covariates.clone(),
            beta: full.beta[..d * k].to_vec(),
            r_eps: full.r_eps[..lower_len].to_vec(),
            sigma_alpha: full.sigma_alpha[..d].iter().map(|r| r[..d].to_vec()).collect(),
        })
    }
}

/// Source of design rows for simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum CovariateGenerator {
    /// Each attribute drawn uniformly over its levels.
    Codebook(CodebookSpec),
    /// Intercept plus `columns − 1` independent standard normals.
    Gaussian { columns: usize },
}

impl CovariateGenerator {
    pub fn width(&self) -> usize {
        match self {
            Self::Codebook(cb) => cb.width(),
            Self::Gaussian { columns } => *columns,
        }
    }

    fn names(&self) -> Option<Vec<String>> {
        match self {
            Self::Codebook(cb) => Some(cb.covariate_names()),
            Self::Gaussian { .. } => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Self::Codebook(cb) => cb.sample_row(rng),
            Self::Gaussian { columns } => {
                let mut x = vec![1.0];
                x.extend((1..*columns).map(|_| rng.sample::<f64, _>(StandardNormal)));
                x
            }
        }
    }
}

/// A simulated panel with the latent quantities that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPanel {
    pub data: PanelData,
    pub truth: TrueParams,
    /// `alpha[i]`, one `D`-vector per individual.
    pub alpha: Vec<Vec<f64>>,
    /// `y*` in cell-major order.
    pub latent: Vec<f64>,
}

/// `y*_it = α_i + B x_it + ε_it`, `α_i ~ N(0, Σ_α)`, `ε_it ~ N(0, R_ε)`,
/// `y = 1(y* > 0)`.
pub fn simulate_panel(
    truth: &TrueParams,
    individuals: usize,
    periods: usize,
    generator: &CovariateGenerator,
    seed: u64,
) -> Result<SimulatedPanel> {
    let (r, sigma) = truth.matrices()?;
    let (d, k) = (truth.outcomes(), truth.covariates());
    if generator.width() != k {
        return Err(Error::arg(format!(
            "covariate generator yields {} columns, parameters have {k}",
            generator.width()
        )));
    }
    if let Some(names) = generator.names() {
        if names != truth.covariates {
            return Err(Error::arg("codebook columns do not match the parameter covariates"));
        }
    }
    if truth.covariates.first().map(String::as_str) != Some(INTERCEPT) {
        return Err(Error::arg("the first covariate must be the intercept"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = individuals * periods;
    let mut x = Vec::with_capacity(cells * k);
    for _ in 0..cells {
        x.extend(generator.sample(&mut rng));
    }
    let la = sigma.cholesky()?.l();
    let lr = r.cholesky()?.l();
    let mut gauss = |l: &DMatrix<f64>| -> DVector<f64> {
        let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        l * z
    };
    let alpha: Vec<Vec<f64>> = (0..individuals).map(|_| gauss(&la).as_slice().to_vec()).collect();
    let mut latent = Vec::with_capacity(cells * d);
    let mut y = Vec::with_capacity(cells * d);
    for c in 0..cells {
        let eps = gauss(&lr);
        let xr = &x[c * k..(c + 1) * k];
        for dd in 0..d {
            let b = &truth.beta[dd * k..(dd + 1) * k];
            let mu: f64 = b.iter().zip(xr).map(|(b, x)| b * x).sum();
            let v = alpha[c / periods][dd] + mu + eps[dd];
            latent.push(v);
            y.push(u8::from(v > 0.0));
        }
    }
    let data = PanelData::new(individuals, periods, truth.outcomes.clone(), truth.covariates.clone(), y, x)?;
    Ok(SimulatedPanel {
        data,
        truth: truth.clone(),
        alpha,
        latent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn null_truth(d: usize) -> TrueParams {
        TrueParams {
            outcomes: (1..=d).map(|i| format!("y{i}")).collect(),
            covariates: vec![INTERCEPT.into()],
            beta: vec![0.0; d],
            r_eps: vec![0.0; d * (d - 1) / 2],
            sigma_alpha: (0..d).map(|i| (0..d).map(|j| if i == j { 1e-12 } else { 0.0 }).collect()).collect(),
        }
    }

    #[test]
    fn null_model_gives_half_ones() {
        let sim = simulate_panel(&null_truth(4), 500, 50, &CovariateGenerator::Gaussian { columns: 1 }, 3).unwrap();
        assert_eq!(sim.data.cells() * 4, 100_000);
        for rate in sim.data.outcome_rates() {
            assert!((rate - 0.5).abs() < 0.01, "{rate}");
        }
    }

    #[test]
    fn seeded_simulation_is_reproducible() {
        let t = TrueParams::paper_subset(3).unwrap();
        let g = CovariateGenerator::Codebook(CodebookSpec::gp_survey());
        let a = simulate_panel(&t, 10, 4, &g, 11).unwrap();
        let b = simulate_panel(&t, 10, 4, &g, 11).unwrap();
        assert_eq!(a, b);
        let c = simulate_panel(&t, 10, 4, &g, 12).unwrap();
        assert_ne!(a.latent, c.latent);
    }

    #[test]
    fn signs_follow_latents() {
        let t = TrueParams::paper();
        let g = CovariateGenerator::Codebook(CodebookSpec::gp_survey());
        let sim = simulate_panel(&t, 5, 3, &g, 1).unwrap();
        for (v, y) in sim.latent.iter().zip(sim.data.y()) {
            assert_eq!(*y == 1, *v > 0.0);
        }
    }

    #[test]
    fn paper_set_values() {
        let t = TrueParams::paper();
        let (r, s) = t.matrices().unwrap();
        assert_eq!(s.as_matrix()[(0, 0)], 0.5147);
        assert_eq!(r.get(3, 2), 0.5891);
        assert_eq!(r.get(7, 6), 0.2046);
        assert_eq!(s.as_matrix()[(7, 6)], 0.4139);
        assert_eq!(t.beta[0], 1.4026);
        // product 2, covariate dchild1
        assert_eq!(t.beta[27 + 14], 1.3001);
        assert_eq!(t.beta[8 * 27 - 1], 0.0332);
    }

    #[test]
    fn mismatched_generator_rejected() {
        let t = TrueParams::paper_subset(2).unwrap();
        assert!(simulate_panel(&t, 2, 2, &CovariateGenerator::Gaussian { columns: 3 }, 0).is_err());
    }
}
