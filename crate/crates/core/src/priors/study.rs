//! Draws from the marginally uniform correlation prior and numeric
//! summaries of its dependence structure.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

use super::sample_corr_marg_uniform;
use crate::corr::corr_to_partial;
use crate::diagnostics::{ks_statistic_cdf, mean};
use crate::error::{Error, Result};

/// Prior draws of every `r_ij` and partial correlation `ρ_ij` (`i > j`,
/// row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct PriorStudy {
    pub dim: usize,
    pub nu: f64,
    pub pairs: Vec<(usize, usize)>,
    pub r: Vec<Vec<f64>>,
    pub rho: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalFit {
    pub name: String,
    pub ks_statistic: f64,
    pub p_value: f64,
}

/// Pearson correlations between selected pairs of draws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dependence {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorStudySummary {
    /// `r_ij` against Uniform(−1, 1).
    pub r_fits: Vec<MarginalFit>,
    /// `ρ_ij` against Beta(D/2, D/2) on (−1, 1).
    pub rho_fits: Vec<MarginalFit>,
    pub dependence: Vec<Dependence>,
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

impl PriorStudy {
    pub fn run(dim: usize, nu: f64, draws: usize, seed: u64) -> Result<Self> {
        if dim < 2 || draws == 0 {
            return Err(Error::arg("prior study needs D >= 2 and at least one draw"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs: Vec<(usize, usize)> = (1..dim).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
        let mut r = vec![Vec::with_capacity(draws); pairs.len()];
        let mut rho = vec![Vec::with_capacity(draws); pairs.len()];
        for _ in 0..draws {
            let c = sample_corr_marg_uniform(dim, nu, &mut rng)?;
            let p = corr_to_partial(&c)?;
            for (n, &(i, j)) in pairs.iter().enumerate() {
                r[n].push(c.get(i, j));
                rho[n].push(p[(i, j)]);
            }
        }
        Ok(Self { dim, nu, pairs, r, rho })
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i > j { (i, j) } else { (j, i) };
        i * (i - 1) / 2 + j
    }

    fn label(&self, n: usize) -> String {
        let (i, j) = self.pairs[n];
        format!("{}{}", i + 1, j + 1)
    }

    /// Marginal KS fits and the dependence summaries behind the usual
    /// pairwise scatter plots. Pairs that need three or four indices are
    /// omitted when `D` is too small.
    pub fn summary(&self) -> Result<PriorStudySummary> {
        let half = self.dim as f64 / 2.0;
        let beta = Beta::new(half, half).map_err(|e| Error::arg(e.to_string()))?;
        let fit = |prefix: &str, n: usize, s: &[f64], cdf: &dyn Fn(f64) -> f64| {
            let k = ks_statistic_cdf(s, cdf);
            MarginalFit {
                name: format!("{prefix}_{}", self.label(n)),
                ks_statistic: k.statistic,
                p_value: k.p_value,
            }
        };
        let r_fits = self.r.iter().enumerate().map(|(n, s)| fit("r", n, s, &|x| (x + 1.0) / 2.0)).collect();
        let rho_fits = self
            .rho
            .iter()
            .enumerate()
            .map(|(n, s)| fit("rho", n, s, &|x| beta.cdf((x + 1.0) / 2.0)))
            .collect();
        let abs = |v: &[f64]| v.iter().map(|x| x.abs()).collect::<Vec<_>>();
        let a = self.index(1, 0);
        let mut dependence = vec![Dependence {
            name: "r_21,rho_21".into(),
            value: pearson(&self.r[a], &self.rho[a]),
        }];
        if self.dim >= 3 {
            let b = self.index(2, 0);
            dependence.extend([
                Dependence {
                    name: "|r_21|,|r_31|".into(),
                    value: pearson(&abs(&self.r[a]), &abs(&self.r[b])),
                },
                Dependence {
                    name: "rho_21,rho_31".into(),
                    value: pearson(&self.rho[a], &self.rho[b]),
                },
                Dependence {
                    name: "|rho_21|,|rho_31|".into(),
                    value: pearson(&abs(&self.rho[a]), &abs(&self.rho[b])),
                },
                Dependence {
                    name: "r_21,rho_31".into(),
                    value: pearson(&self.r[a], &self.rho[b]),
                },
            ]);
        }
        if self.dim >= 4 {
            let c = self.index(3, 2);
            dependence.extend([
                Dependence {
                    name: "|r_21|,|r_43|".into(),
                    value: pearson(&abs(&self.r[a]), &abs(&self.r[c])),
                },
                Dependence {
                    name: "rho_21,rho_43".into(),
                    value: pearson(&self.rho[a], &self.rho[c]),
                },
                Dependence {
                    name: "|rho_21|,|rho_43|".into(),
                    value: pearson(&abs(&self.rho[a]), &abs(&self.rho[c])),
                },
            ]);
        }
        Ok(PriorStudySummary {
            r_fits,
            rho_fits,
            dependence,
        })
    }

    /// One row per draw: `r_ij` columns then `rho_ij` columns.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        let header: Vec<String> = (0..self.pairs.len())
            .map(|n| format!("r_{}", self.label(n)))
            .chain((0..self.pairs.len()).map(|n| format!("rho_{}", self.label(n))))
            .collect();
        w.write_record(&header)?;
        for s in 0..self.r.first().map_or(0, Vec::len) {
            let row: Vec<String> = self.r.iter().chain(&self.rho).map(|c| format!("{:.16e}", c[s])).collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
