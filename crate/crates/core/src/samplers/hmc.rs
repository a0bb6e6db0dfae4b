//! Leapfrog integration and the No-U-Turn sampler with dual-averaging
//! step-size adaptation.
//!
//! NUTS follows the multinomial variant: trajectories double in a random
//! direction, states are drawn with weights `exp(−H)`, and doubling stops on
//! the generalised U-turn criterion (checked across merged subtrees and at
//! their seams), a divergence, or the depth limit.

use rand::Rng;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `n` leapfrog steps of size `eps` with diagonal inverse mass `inv_mass`
/// (empty means identity). `grad` returns `∇ log π`.
pub fn leapfrog<T: Real, F>(
    theta: &[T],
    u: &[T],
    eps: T,
    n: usize,
    mut grad: F,
    inv_mass: &[T],
) -> Result<(Vec<T>, Vec<T>)>
where
    F: FnMut(&[T]) -> Result<Vec<T>>,
{
    if !(eps > T::zero()) || n == 0 {
        return Err(Error::arg("leapfrog needs eps > 0 and at least one step"));
    }
    let dim = theta.len();
    if u.len() != dim || !(inv_mass.is_empty() || inv_mass.len() == dim) {
        return Err(Error::arg("leapfrog: dimension mismatch"));
    }
    let half = eps / (T::one() + T::one());
    let mut q = theta.to_vec();
    let mut p = u.to_vec();
    let mut g = checked(grad(&q)?)?;
    for _ in 0..n {
        for i in 0..dim {
            p[i] += half * g[i];
        }
        for i in 0..dim {
            let m = if inv_mass.is_empty() { T::one() } else { inv_mass[i] };
            q[i] += eps * m * p[i];
        }
        g = checked(grad(&q)?)?;
        for i in 0..dim {
            p[i] += half * g[i];
        }
    }
    Ok((q, p))
}

fn checked<T: Real>(g: Vec<T>) -> Result<Vec<T>> {
    if g.iter().all(|v| v.is_finite()) {
        Ok(g)
    } else {
        Err(Error::NonFinite("gradient (divergent trajectory)"))
    }
}

/// NUTS settings. Defaults: `δ = 0.8`, depth 10, divergence at `ΔH > 1000`,
/// dual averaging with `γ = 0.05`, `t₀ = 10`, `κ = 0.75`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HmcConfig {
    /// Initial step size; `None` runs the doubling/halving heuristic.
    pub step_size: Option<f64>,
    /// Diagonal of `M⁻¹`; empty means identity.
    pub inv_mass: Vec<f64>,
    pub target_accept: f64,
    pub max_depth: usize,
    pub max_delta_h: f64,
    pub gamma: f64,
    pub t0: f64,
    pub kappa: f64,
}

impl Default for HmcConfig {
    fn default() -> Self {
        Self {
            step_size: None,
            inv_mass: Vec::new(),
            target_accept: 0.8,
            max_depth: 10,
            max_delta_h: 1000.0,
            gamma: 0.05,
            t0: 10.0,
            kappa: 0.75,
        }
    }
}

impl HmcConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::config("hmc.target_accept must lie in (0, 1)"));
        }
        if self.max_depth == 0 || self.max_depth > 30 {
            return Err(Error::config("hmc.max_depth must lie in 1..=30"));
        }
        if !pos(self.max_delta_h) || !pos(self.gamma) || !pos(self.t0) || !pos(self.kappa) {
            return Err(Error::config("hmc constants must be positive"));
        }
        if self.step_size.is_some_and(|e| !pos(e)) || self.inv_mass.iter().any(|&m| !pos(m)) {
            return Err(Error::config("hmc step size and mass must be positive"));
        }
        Ok(())
    }
}

/// Hoffman–Gelman dual averaging of `log ε`.
#[derive(Debug, Clone, PartialEq)]
struct DualAveraging {
    mu: f64,
    s_bar: f64,
    x_bar: f64,
    count: f64,
}

impl DualAveraging {
    fn new(eps0: f64) -> Self {
        Self {
            mu: (10.0 * eps0).ln(),
            s_bar: 0.0,
            x_bar: 0.0,
            count: 0.0,
        }
    }

    fn update(&mut self, accept: f64, cfg: &HmcConfig) -> f64 {
        self.count += 1.0;
        let eta = 1.0 / (self.count + cfg.t0);
        self.s_bar = (1.0 - eta) * self.s_bar + eta * (cfg.target_accept - accept);
        let x = self.mu - self.s_bar * self.count.sqrt() / cfg.gamma;
        let w = self.count.powf(-cfg.kappa);
        self.x_bar = (1.0 - w) * self.x_bar + w * x;
        x.exp()
    }
}

/// Per-transition statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct TransitionInfo {
    pub accept_stat: f64,
    pub depth: usize,
    pub n_leapfrog: usize,
    pub divergent: bool,
    pub step_size: f64,
}

#[derive(Debug, Clone)]
struct Point {
    q: Vec<f64>,
    p: Vec<f64>,
    grad: Vec<f64>,
    logp: f64,
}

struct Subtree {
    p_beg: Vec<f64>,
    p_end: Vec<f64>,
    sharp_beg: Vec<f64>,
    sharp_end: Vec<f64>,
    rho: Vec<f64>,
    log_w: f64,
    proposal: Point,
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn no_u_turn(sharp_minus: &[f64], sharp_plus: &[f64], rho: &[f64]) -> bool {
    dot(sharp_plus, rho) > 0.0 && dot(sharp_minus, rho) > 0.0
}

/// Adaptive NUTS kernel. Holds the step size, adaptation state and a
/// divergence counter across transitions.
#[derive(Debug, Clone)]
pub struct Nuts {
    cfg: HmcConfig,
    eps: Option<f64>,
    da: Option<DualAveraging>,
    divergences: usize,
    last: TransitionInfo,
}

struct Ctx<'a, F, R: ?Sized> {
    target: &'a mut F,
    rng: &'a mut R,
    inv_mass: &'a [f64],
    eps: f64,
    h0: f64,
    max_delta_h: f64,
    n_leapfrog: usize,
    sum_accept: f64,
    divergent: bool,
}

impl Nuts {
    pub fn new(cfg: HmcConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            eps: cfg.step_size,
            cfg,
            da: None,
            divergences: 0,
            last: TransitionInfo::default(),
        })
    }

    pub fn config(&self) -> &HmcConfig {
        &self.cfg
    }

    pub fn step_size(&self) -> Option<f64> {
        self.eps
    }

    pub fn divergences(&self) -> usize {
        self.divergences
    }

    pub fn last(&self) -> TransitionInfo {
        self.last
    }

    /// Freeze the step size at the dual-averaging iterate average.
    pub fn finish_adaptation(&mut self) {
        if let Some(da) = self.da.take() {
            if da.count > 0.0 {
                self.eps = Some(da.x_bar.exp());
            }
        }
    }

    fn inv_mass(&self, dim: usize) -> Vec<f64> {
        if self.cfg.inv_mass.is_empty() {
            vec![1.0; dim]
        } else {
            self.cfg.inv_mass.clone()
        }
    }

    /// One transition from `theta`. `target` returns `(log π, ∇ log π)`;
    /// an error or non-finite value inside a trajectory counts as divergence.
    pub fn transition<F, R>(&mut self, theta: &[f64], target: &mut F, adapt: bool, rng: &mut R) -> Result<Vec<f64>>
    where
        F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
        R: Rng + ?Sized,
    {
        let dim = theta.len();
        if dim == 0 {
            return Ok(Vec::new());
        }
        let inv_mass = self.inv_mass(dim);
        if inv_mass.len() != dim {
            return Err(Error::config("hmc.inv_mass length does not match the parameter count"));
        }
        let (logp, grad) = target(theta)?;
        if !logp.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("log target at the current state"));
        }
        let start = Point {
            q: theta.to_vec(),
            p: vec![0.0; dim],
            grad,
            logp,
        };
        let eps = match self.eps {
            Some(e) => e,
            None => {
                let e = find_reasonable_eps(&start, target, &inv_mass, rng)?;
                self.eps = Some(e);
                e
            }
        };
        if adapt && self.da.is_none() {
            self.da = Some(DualAveraging::new(eps));
        }

        let mut z0 = start;
        z0.p = (0..dim)
            .map(|i| rng.sample::<f64, _>(StandardNormal) / inv_mass[i].sqrt())
            .collect();
        let sharp0: Vec<f64> = z0.p.iter().zip(&inv_mass).map(|(p, m)| p * m).collect();
        let h0 = hamiltonian(&z0, &inv_mass);

        let mut ctx = Ctx {
            target,
            rng,
            inv_mass: &inv_mass,
            eps,
            h0,
            max_delta_h: self.cfg.max_delta_h,
            n_leapfrog: 0,
            sum_accept: 0.0,
            divergent: false,
        };

        let mut minus = z0.clone();
        let mut plus = z0.clone();
        let (mut p_minus, mut p_plus) = (z0.p.clone(), z0.p.clone());
        let (mut sharp_minus, mut sharp_plus) = (sharp0.clone(), sharp0);
        let mut rho = z0.p.clone();
        let mut log_w = 0.0;
        let mut sample = z0.q.clone();
        let mut depth = 0;

        while depth < self.cfg.max_depth {
            let forward = ctx.rng.random::<bool>();
            let sub = if forward {
                build_tree(&mut plus, depth, 1.0, &mut ctx)
            } else {
                build_tree(&mut minus, depth, -1.0, &mut ctx)
            };
            let Some(sub) = sub else { break };
            depth += 1;

            if sub.log_w > log_w {
                sample = sub.proposal.q.clone();
            } else {
                let u: f64 = ctx.rng.sample(Open01);
                if u < (sub.log_w - log_w).exp() {
                    sample = sub.proposal.q.clone();
                }
            }
            log_w = log_add_exp(log_w, sub.log_w);

            let merged = add(&rho, &sub.rho);
            let persist = if forward {
                no_u_turn(&sharp_minus, &sub.sharp_end, &merged)
                    && no_u_turn(&sharp_minus, &sub.sharp_beg, &add(&rho, &sub.p_beg))
                    && no_u_turn(&sharp_plus, &sub.sharp_end, &add(&sub.rho, &p_plus))
            } else {
                no_u_turn(&sub.sharp_end, &sharp_plus, &merged)
                    && no_u_turn(&sub.sharp_beg, &sharp_plus, &add(&rho, &sub.p_beg))
                    && no_u_turn(&sub.sharp_end, &sharp_minus, &add(&sub.rho, &p_minus))
            };
            rho = merged;
            if forward {
                p_plus = sub.p_end;
                sharp_plus = sub.sharp_end;
            } else {
                p_minus = sub.p_end;
                sharp_minus = sub.sharp_end;
            }
            if !persist {
                break;
            }
        }

        let accept = if ctx.n_leapfrog > 0 {
            ctx.sum_accept / ctx.n_leapfrog as f64
        } else {
            0.0
        };
        let divergent = ctx.divergent;
        let n_leapfrog = ctx.n_leapfrog;
        if divergent {
            self.divergences += 1;
        }
        self.last = TransitionInfo {
            accept_stat: accept,
            depth,
            n_leapfrog,
            divergent,
            step_size: eps,
        };
        if adapt {
            if let Some(da) = self.da.as_mut() {
                self.eps = Some(da.update(accept, &self.cfg));
            }
        }
        Ok(sample)
    }
}

fn hamiltonian(z: &Point, inv_mass: &[f64]) -> f64 {
    let kinetic: f64 = z.p.iter().zip(inv_mass).map(|(p, m)| p * p * m).sum();
    -z.logp + 0.5 * kinetic
}

/// One leapfrog step in place. Returns false if the target failed.
fn step<F>(z: &mut Point, eps: f64, inv_mass: &[f64], target: &mut F) -> bool
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let half = 0.5 * eps;
    for i in 0..z.q.len() {
        z.p[i] += half * z.grad[i];
        z.q[i] += eps * inv_mass[i] * z.p[i];
    }
    match target(&z.q) {
        Ok((lp, g)) if lp.is_finite() && g.iter().all(|v| v.is_finite()) => {
            z.logp = lp;
            z.grad = g;
            for i in 0..z.q.len() {
                z.p[i] += half * z.grad[i];
            }
            true
        }
        _ => false,
    }
}

fn build_tree<F, R>(z: &mut Point, depth: usize, dir: f64, ctx: &mut Ctx<'_, F, R>) -> Option<Subtree>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    R: Rng + ?Sized,
{
    if depth == 0 {
        ctx.n_leapfrog += 1;
        let ok = step(z, dir * ctx.eps, ctx.inv_mass, ctx.target);
        let h = if ok { hamiltonian(z, ctx.inv_mass) } else { f64::INFINITY };
        let h = if h.is_nan() { f64::INFINITY } else { h };
        if h - ctx.h0 > ctx.max_delta_h {
            ctx.divergent = true;
            return None;
        }
        let log_w = ctx.h0 - h;
        ctx.sum_accept += if log_w > 0.0 { 1.0 } else { log_w.exp() };
        let sharp: Vec<f64> = z.p.iter().zip(ctx.inv_mass).map(|(p, m)| p * m).collect();
        return Some(Subtree {
            p_beg: z.p.clone(),
            p_end: z.p.clone(),
            sharp_beg: sharp.clone(),
            sharp_end: sharp,
            rho: z.p.clone(),
            log_w,
            proposal: z.clone(),
        });
    }
    let left = build_tree(z, depth - 1, dir, ctx)?;
    let right = build_tree(z, depth - 1, dir, ctx)?;
    let log_w = log_add_exp(left.log_w, right.log_w);
    let u: f64 = ctx.rng.sample(Open01);
    let proposal = if u < (right.log_w - log_w).exp() {
        right.proposal
    } else {
        left.proposal
    };
    let rho = add(&left.rho, &right.rho);
    let persist = no_u_turn(&left.sharp_beg, &right.sharp_end, &rho)
        && no_u_turn(&left.sharp_beg, &right.sharp_beg, &add(&left.rho, &right.p_beg))
        && no_u_turn(&left.sharp_end, &right.sharp_end, &add(&right.rho, &left.p_end));
    if !persist {
        return None;
    }
    Some(Subtree {
        p_beg: left.p_beg,
        p_end: right.p_end,
        sharp_beg: left.sharp_beg,
        sharp_end: right.sharp_end,
        rho,
        log_w,
        proposal,
    })
}

/// Double or halve `ε` until a single leapfrog step crosses acceptance 0.8.
fn find_reasonable_eps<F, R>(start: &Point, target: &mut F, inv_mass: &[f64], rng: &mut R) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    R: Rng + ?Sized,
{
    let threshold = 0.8f64.ln();
    let mut eps = 1.0;
    let mut direction = 0.0;
    for _ in 0..100 {
        let mut z = start.clone();
        z.p = inv_mass
            .iter()
            .map(|m| rng.sample::<f64, _>(StandardNormal) / m.sqrt())
            .collect();
        let h0 = hamiltonian(&z, inv_mass);
        let ok = step(&mut z, eps, inv_mass, target);
        let delta = if ok { h0 - hamiltonian(&z, inv_mass) } else { f64::NEG_INFINITY };
        let delta = if delta.is_nan() { f64::NEG_INFINITY } else { delta };
        if direction == 0.0 {
            direction = if delta > threshold { 1.0 } else { -1.0 };
        } else if (direction > 0.0 && delta <= threshold) || (direction < 0.0 && delta > threshold) {
            return Ok(eps);
        }
        eps = if direction > 0.0 { eps * 2.0 } else { eps * 0.5 };
        if !(eps > 1e-12 && eps < 1e7) {
            return Err(Error::NonFinite("step size search"));
        }
    }
    Ok(eps)
}

/// Single NUTS transition through a caller-held kernel.
pub fn nuts_sample<F, R>(target: &mut F, theta0: &[f64], nuts: &mut Nuts, adapting: bool, rng: &mut R) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    R: Rng + ?Sized,
{
    nuts.transition(theta0, target, adapting, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn std_normal(x: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((-0.5 * dot(x, x), x.iter().map(|v| -v).collect()))
    }

    #[test]
    fn free_particle() {
        let (q, p) = leapfrog(&[1.0, 2.0], &[0.5, -1.0], 0.1, 10, |x: &[f64]| Ok(vec![0.0; x.len()]), &[2.0, 1.0]).unwrap();
        assert!((q[0] - (1.0 + 1.0 * 2.0 * 0.5)).abs() < 1e-12);
        assert!((q[1] - (2.0 - 1.0)).abs() < 1e-12);
        assert_eq!(p, vec![0.5, -1.0]);
    }

    #[test]
    fn reversible() {
        let grad = |x: &[f64]| Ok(vec![-x[0] - 0.3 * x[1].powi(3), -x[1] + 0.1 * x[0]]);
        let (q, p) = leapfrog(&[0.4, -1.2], &[0.9, 0.3], 0.05, 40, grad, &[]).unwrap();
        let neg: Vec<f64> = p.iter().map(|v| -v).collect();
        let (q2, p2) = leapfrog(&q, &neg, 0.05, 40, grad, &[]).unwrap();
        assert!((q2[0] - 0.4).abs() < 1e-10 && (q2[1] + 1.2).abs() < 1e-10);
        assert!((p2[0] + 0.9).abs() < 1e-10 && (p2[1] + 0.3).abs() < 1e-10);
    }

    #[test]
    fn energy_error_small() {
        let (q, p) = leapfrog(&[1.0], &[-0.5], 0.1, 10, |x: &[f64]| Ok(vec![-x[0]]), &[]).unwrap();
        let h = |q: f64, p: f64| 0.5 * (q * q + p * p);
        assert!((h(q[0], p[0]) - h(1.0, -0.5)).abs() < 0.01);
    }

    #[test]
    fn non_finite_gradient_is_error() {
        let r = leapfrog(&[1.0], &[1.0], 0.1, 3, |_: &[f64]| Ok(vec![f64::NAN]), &[]);
        assert!(r.is_err());
    }

    #[test]
    fn nuts_standard_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut nuts = Nuts::new(HmcConfig::default()).unwrap();
        let mut target = std_normal;
        let mut x = vec![3.0, -3.0];
        for _ in 0..1000 {
            x = nuts.transition(&x, &mut target, true, &mut rng).unwrap();
        }
        nuts.finish_adaptation();
        let warmup_divergences = nuts.divergences();
        let n = 20_000;
        let mut draws = vec![Vec::with_capacity(n); 2];
        let mut acc = 0.0;
        for _ in 0..n {
            x = nuts.transition(&x, &mut target, false, &mut rng).unwrap();
            draws[0].push(x[0]);
            draws[1].push(x[1]);
            acc += nuts.last().accept_stat;
        }
        for d in &draws {
            let m = d.iter().sum::<f64>() / n as f64;
            let v = d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
            assert!(m.abs() < 0.02, "{m}");
            assert!((v - 1.0).abs() < 0.05, "{v}");
        }
        assert!((acc / n as f64 - 0.8).abs() < 0.05);
        assert_eq!(nuts.divergences(), warmup_divergences);
    }

    #[test]
    fn divergence_counted_and_state_kept() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut nuts = Nuts::new(HmcConfig {
            step_size: Some(50.0),
            ..HmcConfig::default()
        })
        .unwrap();
        // steep quartic: a huge step explodes the energy
        let mut target = |x: &[f64]| Ok((-x[0].powi(4), vec![-4.0 * x[0].powi(3)]));
        let out = nuts.transition(&[1.0], &mut target, false, &mut rng).unwrap();
        assert!(nuts.last().divergent);
        assert_eq!(nuts.divergences(), 1);
        assert_eq!(out, vec![1.0]);
    }
}
