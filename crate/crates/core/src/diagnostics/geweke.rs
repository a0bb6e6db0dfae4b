//! Joint-distribution ("getting it right") test of the Gibbs engine.
//!
//! The marginal-conditional simulator draws `θ` from the prior and data from
//! the model. The successive-conditional simulator alternates one Gibbs sweep
//! with a fresh draw of the data given `θ`. Both target the same joint, so
//! the moments of any function of `θ` must agree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{iact, mean};
use crate::data::{PanelData, INTERCEPT};
use crate::error::{Error, Result};
use crate::inference::{BetaPriorSpec, Gibbs, ModelSpec, ParamState, SigmaAlphaPriorSpec};
use crate::priors::TauSharing;
use crate::samplers::{HmcConfig, ProposalMode};

#[derive(Debug, Clone, PartialEq)]
pub struct GewekeConfig {
    /// Successive-conditional sweeps kept.
    pub sweeps: usize,
    /// Leading sweeps used for step-size adaptation and then dropped.
    pub warmup: usize,
    /// Independent marginal-conditional draws.
    pub prior_draws: usize,
    pub beta_mode: ProposalMode,
    pub alpha_mode: ProposalMode,
    pub seed: u64,
    pub hmc: HmcConfig,
    /// Inflate the random-effect conditional covariance by this factor.
    pub corrupt_alpha_variance: Option<f64>,
}

impl Default for GewekeConfig {
    fn default() -> Self {
        Self {
            sweeps: 100_000,
            warmup: 1_000,
            prior_draws: 100_000,
            beta_mode: ProposalMode::Independent,
            alpha_mode: ProposalMode::Independent,
            seed: 1,
            hmc: HmcConfig::default(),
            corrupt_alpha_variance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GewekeReport {
    pub names: Vec<String>,
    pub prior_mean: Vec<f64>,
    pub chain_mean: Vec<f64>,
    pub z: Vec<f64>,
}

impl GewekeReport {
    pub fn max_abs_z(&self) -> f64 {
        self.z.iter().fold(0.0, |m, z| m.max(z.abs()))
    }
}

/// Test functions: first and second moments of `asinh` of the location
/// parameters, of `log σ²` for the variances, and of the correlations
/// themselves. The transforms keep every moment finite under heavy-tailed
/// priors (horseshoe coefficients, half-t scales).
fn features(s: &ParamState) -> Vec<f64> {
    let mut f = Vec::new();
    let mut push = |v: f64| {
        f.push(v);
        f.push(v * v);
    };
    for &b in &s.beta {
        push(b.asinh());
    }
    for v in s.r.vechl() {
        push(v);
    }
    for v in s.sigma_alpha.diagonal() {
        push(v.ln());
    }
    for v in s.sigma_alpha.to_correlation().vechl() {
        push(v);
    }
    for &a in &s.alpha {
        push(a.asinh());
    }
    f
}

fn feature_names(d: usize, k: usize, p: usize) -> Vec<String> {
    let mut base = Vec::new();
    for j in 0..d * k {
        base.push(format!("asinh(beta_{}_{})", j / k + 1, j % k + 1));
    }
    for i in 1..d {
        for j in 0..i {
            base.push(format!("r_{}_{}", i + 1, j + 1));
        }
    }
    for i in 0..d {
        base.push(format!("log(sigma2_alpha_{})", i + 1));
    }
    for i in 1..d {
        for j in 0..i {
            base.push(format!("ralpha_{}_{}", i + 1, j + 1));
        }
    }
    for j in 0..p * d {
        base.push(format!("asinh(alpha_{}_{})", j / d + 1, j % d + 1));
    }
    base.into_iter().flat_map(|n| [n.clone(), format!("{n}^2")]).collect()
}

fn variance(x: &[f64], m: f64) -> f64 {
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Run both simulators on the design of `design` (its outcomes are
/// ignored) and return a z-score per test function. The chain side uses
/// IACT-inflated standard errors.
pub fn geweke_joint_test(design: &PanelData, spec: &ModelSpec, cfg: &GewekeConfig) -> Result<GewekeReport> {
    if cfg.sweeps < 10 || cfg.prior_draws < 10 {
        return Err(Error::arg("the joint-distribution test needs at least 10 draws per side"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut g = Gibbs::new(design, spec, cfg.hmc.clone())?;
    if let Some(f) = cfg.corrupt_alpha_variance {
        g.corrupt_alpha_variance(f);
    }
    let (d, k, p) = (g.data().outcomes(), g.data().covariates(), g.data().individuals());
    let names = feature_names(d, k, p);

    let mut prior: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.prior_draws); names.len()];
    for _ in 0..cfg.prior_draws {
        g.draw_from_prior(&mut rng)?;
        for (col, v) in prior.iter_mut().zip(features(g.state())) {
            col.push(v);
        }
    }

    g.draw_from_prior(&mut rng)?;
    let mut chain: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.sweeps); names.len()];
    for it in 0..cfg.warmup + cfg.sweeps {
        if it == cfg.warmup {
            g.finish_adaptation();
        }
        g.sweep(cfg.beta_mode, cfg.alpha_mode, it < cfg.warmup, &mut rng)?;
        g.simulate_outcomes(&mut rng)?;
        if it >= cfg.warmup {
            for (col, v) in chain.iter_mut().zip(features(g.state())) {
                col.push(v);
            }
        }
    }

    let mut z = Vec::with_capacity(names.len());
    let (mut pm, mut cm) = (Vec::new(), Vec::new());
    for (a, b) in prior.iter().zip(&chain) {
        let (ma, mb) = (mean(a), mean(b));
        let se2 = variance(a, ma) / a.len() as f64 + variance(b, mb) * iact(b).unwrap_or(1.0).max(1.0) / b.len() as f64;
        let zz = (ma - mb) / se2.sqrt();
        if !zz.is_finite() {
            return Err(Error::NonFinite("joint-distribution test moments"));
        }
        pm.push(ma);
        cm.push(mb);
        z.push(zz);
    }
    Ok(GewekeReport {
        names,
        prior_mean: pm,
        chain_mean: cm,
        z,
    })
}

/// Design for the joint-distribution test: two outcomes, three individuals,
/// two periods. With `covariates == 2` the second column alternates
/// `±x_scale` across cells.
pub fn harness_design(covariates: usize, x_scale: f64) -> Result<PanelData> {
    let (p, t) = (3, 2);
    let names: Vec<String> = match covariates {
        1 => vec![INTERCEPT.into()],
        2 => vec![INTERCEPT.into(), "x".into()],
        _ => return Err(Error::arg("the harness design has one or two covariates")),
    };
    let mut x = Vec::new();
    for c in 0..p * t {
        x.push(1.0);
        if covariates == 2 {
            x.push(if c % 2 == 0 { x_scale } else { -x_scale });
        }
    }
    PanelData::new(p, t, vec!["y1".into(), "y2".into()], names, vec![0; p * t * 2], x)
}

/// Priors used by the joint-distribution test. Moderate hyperparameters keep
/// the successive-conditional chain out of the far tails, where data
/// augmentation mixes too slowly for moment comparisons.
pub fn harness_spec(horseshoe: bool, hierarchical: bool) -> ModelSpec {
    let beta_prior = if horseshoe {
        BetaPriorSpec::Horseshoe {
            tau: TauSharing::Global,
            intercept_variance: 1.0,
        }
    } else {
        BetaPriorSpec::Normal {
            variance: 1.0,
            individual_variance: None,
        }
    };
    let sigma_alpha_prior = if hierarchical {
        SigmaAlphaPriorSpec::Hiw {
            lambda: 2.0,
            scales: vec![0.5],
        }
    } else {
        SigmaAlphaPriorSpec::Iw { df: Some(6.0), scale: 3.0 }
    };
    ModelSpec {
        beta_prior,
        sigma_alpha_prior,
        ..Default::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design() -> PanelData {
        PanelData::new(2, 2, vec!["a".into(), "b".into()], vec![INTERCEPT.into()], vec![0; 8], vec![1.0; 4]).unwrap()
    }

    #[test]
    fn seeded_runs_repeat() {
        let cfg = GewekeConfig {
            sweeps: 300,
            warmup: 50,
            prior_draws: 300,
            ..Default::default()
        };
        let a = geweke_joint_test(&design(), &ModelSpec::default(), &cfg).unwrap();
        let b = geweke_joint_test(&design(), &ModelSpec::default(), &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.names.len(), a.z.len());
        assert_eq!(a.names[0], "asinh(beta_1_1)");
    }

    #[test]
    fn short_run_passes() {
        let cfg = GewekeConfig {
            sweeps: 20_000,
            warmup: 500,
            prior_draws: 20_000,
            seed: 3,
            ..Default::default()
        };
        let r = geweke_joint_test(&design(), &ModelSpec::default(), &cfg).unwrap();
        assert!(r.max_abs_z() < 4.5, "{:?}", r);
    }
}
