use std::fs;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gibbs::Gibbs;
use super::spec::{ModelSpec, SamplerConfig};
use crate::corr::{symmetric_from_vechl, CorrelationMatrix, CovarianceMatrix};
use crate::data::PanelData;
use crate::error::{Error, Result};

/// A named matrix of draws: one row per kept iteration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Block {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Block {
    fn new(names: Vec<String>) -> Self {
        Self { names, rows: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    /// Draws of column `j`.
    pub fn series(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        self.names.iter().position(|n| n == name).map(|j| self.series(j))
    }

    pub fn means(&self) -> Vec<f64> {
        let n = self.rows.len() as f64;
        (0..self.width()).map(|j| self.rows.iter().map(|r| r[j]).sum::<f64>() / n).collect()
    }

    fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.names)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| format!("{v:.16e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let names = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|v| {
                    v.parse::<f64>().map_err(|_| Error::Data {
                        row: i + 1,
                        column: path.display().to_string(),
                        message: format!("`{v}` is not a number"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self { names, rows })
    }
}

/// Per-draw sampler diagnostics for the correlation block.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IterationStats {
    pub divergent: bool,
    pub tree_depth: usize,
    pub step_size: f64,
    pub accept_stat: f64,
}

/// Run description stored next to the draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMeta {
    pub sampler: String,
    pub outcomes: Vec<String>,
    pub covariates: Vec<String>,
    pub individuals: usize,
    pub periods: usize,
    pub spec: ModelSpec,
    pub config: SamplerConfig,
    pub divergences_total: usize,
    pub divergences_after_burn_in: usize,
    pub final_step_size: Option<f64>,
    pub seconds_total: f64,
    pub seconds_per_iteration: f64,
}

/// Kept draws of one chain.
///
/// Blocks: `beta` (`beta_d_k`, outcome-major), `r_eps` and `l_eps` (lower
/// triangles, row-major), `sigma_alpha_diag`, `r_alpha` (correlation of
/// `Σ_α`), and optionally `alpha` and `latent`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDraws {
    pub meta: ChainMeta,
    pub beta: Block,
    pub r_eps: Block,
    pub l_eps: Block,
    pub sigma_alpha_diag: Block,
    pub r_alpha: Block,
    pub alpha: Option<Block>,
    pub latent: Option<Block>,
    pub stats: Vec<IterationStats>,
    /// Wall-clock seconds of every sweep, burn-in included. Not persisted.
    pub timings: Vec<f64>,
}

pub const BLOCK_NAMES: [&str; 7] = ["latent", "alpha", "beta", "l_eps", "r_eps", "sigma_alpha_diag", "r_alpha"];

fn lower_names(prefix: &str, d: usize) -> Vec<String> {
    let mut v = Vec::new();
    for i in 1..d {
        for j in 0..i {
            v.push(format!("{prefix}_{}_{}", i + 1, j + 1));
        }
    }
    v
}

impl ChainDraws {
    pub(crate) fn empty(meta: ChainMeta, store_alpha: bool, latent_cells: usize) -> Self {
        let (d, k, p) = (meta.outcomes.len(), meta.covariates.len(), meta.individuals);
        let beta = (0..d * k).map(|j| format!("beta_{}_{}", j / k + 1, j % k + 1)).collect();
        let alpha = store_alpha.then(|| Block::new((0..p * d).map(|j| format!("alpha_{}_{}", j / d + 1, j % d + 1)).collect()));
        let latent = (latent_cells > 0)
            .then(|| Block::new((0..latent_cells * d).map(|j| format!("ystar_{}_{}", j / d + 1, j % d + 1)).collect()));
        Self {
            beta: Block::new(beta),
            r_eps: Block::new(lower_names("r", d)),
            l_eps: Block::new(lower_names("l", d)),
            sigma_alpha_diag: Block::new((1..=d).map(|i| format!("sigma2_alpha_{i}")).collect()),
            r_alpha: Block::new(lower_names("ralpha", d)),
            alpha,
            latent,
            meta,
            stats: Vec::new(),
            timings: Vec::new(),
        }
    }

    pub fn outcomes(&self) -> usize {
        self.meta.outcomes.len()
    }

    pub fn covariates(&self) -> usize {
        self.meta.covariates.len()
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        match name {
            "beta" => Some(&self.beta),
            "r_eps" => Some(&self.r_eps),
            "l_eps" => Some(&self.l_eps),
            "sigma_alpha_diag" => Some(&self.sigma_alpha_diag),
            "r_alpha" => Some(&self.r_alpha),
            "alpha" => self.alpha.as_ref(),
            "latent" => self.latent.as_ref(),
            _ => None,
        }
    }

    pub(crate) fn record(
        &mut self,
        beta: &[f64],
        l: &[f64],
        r: &CorrelationMatrix,
        sigma_alpha: &CovarianceMatrix,
        alpha: &[f64],
        latent: &[f64],
        stats: IterationStats,
    ) {
        self.beta.rows.push(beta.to_vec());
        self.l_eps.rows.push(l.to_vec());
        self.r_eps.rows.push(r.vechl());
        self.sigma_alpha_diag.rows.push(sigma_alpha.diagonal());
        self.r_alpha.rows.push(sigma_alpha.to_correlation().vechl());
        if let Some(b) = self.alpha.as_mut() {
            b.rows.push(alpha.to_vec());
        }
        if let Some(b) = self.latent.as_mut() {
            let n = b.width();
            b.rows.push(latent[..n].to_vec());
        }
        self.stats.push(stats);
    }

    /// `R_ε` of draw `s`.
    pub fn r_eps_matrix(&self, s: usize) -> Result<CorrelationMatrix> {
        CorrelationMatrix::from_vechl(self.outcomes(), &self.r_eps.rows[s])
    }

    /// `Σ_α` of draw `s`, rebuilt from its variances and correlations.
    pub fn sigma_alpha_matrix(&self, s: usize) -> Result<CovarianceMatrix> {
        let d = self.outcomes();
        let r = symmetric_from_vechl(d, &self.r_alpha.rows[s], 1.0)?;
        let sd: Vec<f64> = self.sigma_alpha_diag.rows[s].iter().map(|v| v.sqrt()).collect();
        CovarianceMatrix::new(DMatrix::from_fn(d, d, |i, j| r[(i, j)] * sd[i] * sd[j]))
    }

    /// `B` of draw `s` as a `D × K` matrix.
    pub fn beta_matrix(&self, s: usize) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.outcomes(), self.covariates(), &self.beta.rows[s])
    }

    /// Random effects of individual `i` at draw `s`.
    pub fn alpha_of(&self, s: usize, i: usize) -> Option<&[f64]> {
        let d = self.outcomes();
        self.alpha.as_ref().map(|b| &b.rows[s][i * d..(i + 1) * d])
    }

    /// Write `header.json` and one CSV per block into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("header.json"), serde_json::to_string_pretty(&self.meta)?)?;
        for name in BLOCK_NAMES {
            if let Some(b) = self.block(name) {
                b.write_csv(&dir.join(format!("{name}.csv")))?;
            }
        }
        let mut w = csv::Writer::from_path(dir.join("sampler.csv"))?;
        for s in &self.stats {
            w.serialize(s)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self> {
        let meta: ChainMeta = serde_json::from_str(&fs::read_to_string(dir.join("header.json"))?)?;
        let opt = |name: &str| -> Result<Option<Block>> {
            let p = dir.join(format!("{name}.csv"));
            if p.exists() {
                Block::read_csv(&p).map(Some)
            } else {
                Ok(None)
            }
        };
        let req = |name: &str| Block::read_csv(&dir.join(format!("{name}.csv")));
        let mut stats = Vec::new();
        let sp = dir.join("sampler.csv");
        if sp.exists() {
            for rec in csv::Reader::from_path(sp)?.deserialize() {
                stats.push(rec?);
            }
        }
        Ok(Self {
            beta: req("beta")?,
            r_eps: req("r_eps")?,
            l_eps: req("l_eps")?,
            sigma_alpha_diag: req("sigma_alpha_diag")?,
            r_alpha: req("r_alpha")?,
            alpha: opt("alpha")?,
            latent: opt("latent")?,
            meta,
            stats,
            timings: Vec::new(),
        })
    }
}

pub(crate) fn base_meta(sampler: &str, g: &Gibbs, spec: &ModelSpec, cfg: &SamplerConfig) -> ChainMeta {
    let data = g.data();
    ChainMeta {
        sampler: sampler.into(),
        outcomes: data.outcome_names().to_vec(),
        covariates: data.covariate_names().to_vec(),
        individuals: data.individuals(),
        periods: data.periods(),
        spec: spec.clone(),
        config: cfg.clone(),
        divergences_total: 0,
        divergences_after_burn_in: 0,
        final_step_size: None,
        seconds_total: 0.0,
        seconds_per_iteration: 0.0,
    }
}

/// Run one chain of the blocked Gibbs sampler. Deterministic given
/// `cfg.seed`.
pub fn run_chain(data: &PanelData, spec: &ModelSpec, cfg: &SamplerConfig) -> Result<ChainDraws> {
    cfg.validate()?;
    let mut g = Gibbs::new(data, spec, cfg.hmc.clone())?;
    if cfg.store_latent_cells > g.data().cells() {
        return Err(Error::config("store_latent_cells exceeds the number of cells"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draws = ChainDraws::empty(base_meta("gibbs-nuts", &g, spec, cfg), cfg.store_alpha, cfg.store_latent_cells);
    let start = Instant::now();
    let mut div_burn = 0;
    for it in 0..cfg.iterations {
        let t0 = Instant::now();
        if it == cfg.burn_in {
            g.finish_adaptation();
            div_burn = g.nuts().divergences();
        }
        let (bm, am) = cfg.modes_at(it);
        let info = g.sweep(bm, am, it < cfg.burn_in, &mut rng)?;
        draws.timings.push(t0.elapsed().as_secs_f64());
        if it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0 {
            let s = g.state();
            let stats = IterationStats {
                divergent: info.divergent,
                tree_depth: info.depth,
                step_size: info.step_size,
                accept_stat: info.accept_stat,
            };
            draws.record(&s.beta, s.l.entries(), &s.r, &s.sigma_alpha, &s.alpha, &s.latent, stats);
        }
    }
    let total = start.elapsed().as_secs_f64();
    draws.meta.divergences_total = g.nuts().divergences();
    draws.meta.divergences_after_burn_in = g.nuts().divergences() - div_burn;
    draws.meta.final_step_size = g.nuts().step_size();
    draws.meta.seconds_total = total;
    draws.meta.seconds_per_iteration = total / cfg.iterations as f64;
    Ok(draws)
}
