//! Univariate truncated normal draws.
//!
//! Inverse CDF in the bulk, computed on the upper tail when the interval
//! lies above zero so no precision is lost to `1 − Φ`. Beyond four standard
//! deviations Robert's exponential (or uniform, for short intervals)
//! rejection takes over.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

const TAIL: f64 = 4.0;

fn std_normal() -> Normal {
    Normal::standard()
}

/// Draw from `N(μ, σ²)` restricted to `(lo, hi)`. Infinite bounds allowed.
pub fn sample_truncated_normal<R: Rng + ?Sized>(mu: f64, sigma: f64, lo: f64, hi: f64, rng: &mut R) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::arg(format!("truncated normal needs sigma > 0, got {sigma}")));
    }
    if !(lo < hi) || lo.is_nan() || hi.is_nan() || !mu.is_finite() {
        return Err(Error::arg(format!("truncated normal needs lo < hi, got ({lo}, {hi})")));
    }
    let a = (lo - mu) / sigma;
    let b = (hi - mu) / sigma;
    let x = mu + sigma * standard_truncated(a, b, rng);
    // far from the mean the back-transform can round onto a bound
    Ok(if x <= lo {
        lo.next_up().min(0.5 * (lo + hi))
    } else if x >= hi {
        hi.next_down().max(0.5 * (lo + hi))
    } else {
        x
    })
}

/// Standard normal restricted to `(a, b)`.
pub fn standard_truncated<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if a >= TAIL {
        tail(a, b, rng)
    } else if b <= -TAIL {
        -tail(-b, -a, rng)
    } else if a > 0.0 {
        // both bounds on the upper side: work with survival probabilities
        let n = std_normal();
        let (qa, qb) = (n.cdf(-a), n.cdf(-b));
        let u: f64 = Open01.sample(rng);
        -n.inverse_cdf(qb + u * (qa - qb))
    } else {
        let n = std_normal();
        let (pa, pb) = (n.cdf(a), n.cdf(b));
        let u: f64 = Open01.sample(rng);
        n.inverse_cdf(pa + u * (pb - pa))
    }
}

/// `a > 0`: rejection from a translated exponential, or uniform when the
/// interval is short.
fn tail<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if b.is_finite() && b - a < 1.0 / a {
        loop {
            let z = a + (b - a) * rng.sample::<f64, _>(Open01);
            let u: f64 = Open01.sample(rng);
            if u.ln() <= 0.5 * (a * a - z * z) {
                return z;
            }
        }
    }
    let alpha = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let e: f64 = Exp1.sample(rng);
        let z = a + e / alpha;
        if z >= b {
            continue;
        }
        let u: f64 = Open01.sample(rng);
        if u.ln() <= -0.5 * (z - alpha) * (z - alpha) {
            return z;
        }
    }
}
