//! Integrated autocorrelation time via Geyer's initial positive sequence.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Sample autocovariances `γ_0 .. γ_{n-1}` (biased, divided by `n`) by FFT.
pub fn autocovariance(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let m = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = series
        .iter()
        .map(|&x| Complex::new(x - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(m)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    buf[..n].iter().map(|c| c.re / (m as f64 * n as f64)).collect()
}

/// Autocorrelations `ρ_0 = 1, ρ_1, ...`.
pub fn autocorrelation(series: &[f64]) -> Result<Vec<f64>> {
    let acov = autocovariance(series);
    let g0 = *acov.first().ok_or_else(|| Error::arg("empty series"))?;
    if !(g0 > 0.0) || !g0.is_finite() {
        return Err(Error::arg("autocorrelation undefined for a constant series"));
    }
    Ok(acov.iter().map(|g| g / g0).collect())
}

/// `1 + 2 Σ_{j≥1} ρ_j`, truncated where the paired sums `ρ_{2k} + ρ_{2k+1}`
/// first turn non-positive.
///
/// Values below one arise for negatively correlated chains. The estimate is
/// floored at `1 / log10(n)`.
pub fn iact(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 10 {
        return Err(Error::arg(format!("IACT needs at least 10 draws, got {n}")));
    }
    let rho = autocorrelation(series)?;
    let mut sum = 0.0;
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = rho[2 * k] + rho[2 * k + 1];
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        k += 1;
    }
    let tau = -1.0 + 2.0 * sum;
    Ok(tau.max(1.0 / (n as f64).log10()))
}

/// `n / IACT`.
pub fn ess(series: &[f64]) -> Result<f64> {
    Ok(series.len() as f64 / iact(series)?)
}
