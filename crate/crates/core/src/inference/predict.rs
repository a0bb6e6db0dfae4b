//! Posterior predictive probabilities of single outcomes and bundles.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::chain::ChainDraws;
use crate::corr::CorrelationMatrix;
use crate::diagnostics::{mean, quantiles};
use crate::error::{Error, Result};

/// Event over the outcomes of one cell. Indices are zero-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredictEvent {
    /// `y_d = 1`.
    Single(usize),
    /// At least one outcome of the bundle is 1.
    AtLeastOne(Vec<usize>),
    /// Every outcome of the bundle is 1.
    All(Vec<usize>),
}

impl PredictEvent {
    /// Bundle event from one-based outcome indices; a single index gives a
    /// marginal event.
    pub fn at_least_one(one_based: &[usize]) -> Result<Self> {
        let idx = zero_based(one_based)?;
        Ok(if idx.len() == 1 { Self::Single(idx[0]) } else { Self::AtLeastOne(idx) })
    }

    pub fn all(one_based: &[usize]) -> Result<Self> {
        let idx = zero_based(one_based)?;
        Ok(if idx.len() == 1 { Self::Single(idx[0]) } else { Self::All(idx) })
    }

    /// Column label, e.g. `P(y3=1)`, `P(y3+y4>=1)` or `P(y3=1,y4=1)`.
    pub fn label(&self) -> String {
        match self {
            Self::Single(d) => format!("P(y{}=1)", d + 1),
            Self::AtLeastOne(b) => {
                let terms: Vec<String> = b.iter().map(|d| format!("y{}", d + 1)).collect();
                format!("P({}>=1)", terms.join("+"))
            }
            Self::All(b) => {
                let terms: Vec<String> = b.iter().map(|d| format!("y{}=1", d + 1)).collect();
                format!("P({})", terms.join(","))
            }
        }
    }

    fn indices(&self) -> &[usize] {
        match self {
            Self::Single(d) => std::slice::from_ref(d),
            Self::AtLeastOne(b) | Self::All(b) => b,
        }
    }

    pub fn validate(&self, outcomes: usize) -> Result<()> {
        let idx = self.indices();
        if idx.is_empty() {
            return Err(Error::arg("event needs at least one outcome"));
        }
        if let Some(d) = idx.iter().find(|&&d| d >= outcomes) {
            return Err(Error::arg(format!("outcome {} out of range 1..={outcomes}", d + 1)));
        }
        let mut s = idx.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.len() != idx.len() {
            return Err(Error::arg("event lists an outcome twice"));
        }
        Ok(())
    }

    fn occurs(&self, ystar: &[f64]) -> bool {
        match self {
            Self::Single(d) => ystar[*d] > 0.0,
            Self::AtLeastOne(b) => b.iter().any(|&d| ystar[d] > 0.0),
            Self::All(b) => b.iter().all(|&d| ystar[d] > 0.0),
        }
    }
}

fn zero_based(one_based: &[usize]) -> Result<Vec<usize>> {
    if one_based.is_empty() || one_based.contains(&0) {
        return Err(Error::arg("outcome indices are one-based and non-empty"));
    }
    Ok(one_based.iter().map(|d| d - 1).collect())
}

fn std_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// `P(event | μ, R)` for latent mean `μ`. Marginal events use `Φ(μ_d)`;
/// bundles average the indicator over the error draws in `eps` (rows of
/// `N(0, R)` draws).
pub fn event_probability(mu: &[f64], event: &PredictEvent, eps: &[DVector<f64>]) -> f64 {
    match event {
        PredictEvent::Single(d) => std_normal_cdf(mu[*d]),
        _ => {
            let mut y = vec![0.0; mu.len()];
            let hits = eps
                .iter()
                .filter(|e| {
                    for (j, v) in y.iter_mut().enumerate() {
                        *v = mu[j] + e[j];
                    }
                    event.occurs(&y)
                })
                .count();
            hits as f64 / eps.len() as f64
        }
    }
}

/// `n` draws of `N(0, R)`.
pub fn error_draws<R: Rng + ?Sized>(r: &CorrelationMatrix, n: usize, rng: &mut R) -> Result<Vec<DVector<f64>>> {
    let l = r.cholesky()?.l();
    let d = r.dim();
    Ok((0..n)
        .map(|_| &l * DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal)))
        .collect())
}

/// Probability draws for one individual, with summaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictiveSummary {
    pub individual: usize,
    pub mean: f64,
    pub median: f64,
    pub q025: f64,
    pub q975: f64,
}

/// Per-individual posterior draws of `P(event | α_i, B, R)` at covariate
/// vectors `designs` (intercept first; one vector shared by everyone, or
/// one per individual).
///
/// The outer vector is indexed by individual, the inner by draw. Bundle
/// events use `n_mc` error draws per posterior draw, shared across
/// individuals.
pub fn posterior_predictive<R: Rng + ?Sized>(
    draws: &ChainDraws,
    designs: &[Vec<f64>],
    event: &PredictEvent,
    n_mc: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if n_mc < 1 {
        return Err(Error::arg("n_mc must be at least 1"));
    }
    let (d, k, p) = (draws.outcomes(), draws.covariates(), draws.meta.individuals);
    event.validate(d)?;
    if draws.alpha.is_none() {
        return Err(Error::arg("prediction needs stored random-effect draws"));
    }
    if designs.len() != 1 && designs.len() != p {
        return Err(Error::arg(format!("expected 1 or {p} covariate vectors, got {}", designs.len())));
    }
    if let Some(x) = designs.iter().find(|x| x.len() != k) {
        return Err(Error::arg(format!("covariate vector has {} entries, model has {k}", x.len())));
    }
    let mut out = vec![Vec::with_capacity(draws.len()); p];
    let mut mu = vec![0.0; d];
    for s in 0..draws.len() {
        let b: DMatrix<f64> = draws.beta_matrix(s);
        let eps = match event {
            PredictEvent::Single(_) => Vec::new(),
            _ => error_draws(&draws.r_eps_matrix(s)?, n_mc, rng)?,
        };
        for (i, col) in out.iter_mut().enumerate() {
            let x = &designs[if designs.len() == 1 { 0 } else { i }];
            let a = draws.alpha_of(s, i).expect("checked above");
            for (dd, m) in mu.iter_mut().enumerate() {
                *m = a[dd] + b.row(dd).iter().zip(x).map(|(b, x)| b * x).sum::<f64>();
            }
            col.push(event_probability(&mu, event, &eps));
        }
    }
    Ok(out)
}

/// Mean, median and 95% equal-tailed interval of each individual's series.
pub fn summarize_predictive(series: &[Vec<f64>]) -> Vec<PredictiveSummary> {
    series
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let q = quantiles(s, &[0.025, 0.5, 0.975]);
            PredictiveSummary {
                individual: i,
                mean: mean(s),
                median: q[1],
                q025: q[0],
                q975: q[2],
            }
        })
        .collect()
}
