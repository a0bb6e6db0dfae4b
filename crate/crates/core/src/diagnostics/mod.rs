//! Mixing and accuracy diagnostics.

pub mod geweke;
mod iact;
pub mod ks;
mod report;

pub use geweke::{geweke_joint_test, harness_design, harness_spec, GewekeConfig, GewekeReport};
pub use iact::{autocorrelation, autocovariance, ess, iact};
pub use ks::{ks_statistic_cdf, ks_two_sample, KsResult};
pub use report::{iact_ratio_report, IactRatioRow, IactRatioTable};

use serde::Serialize;

use crate::error::{Error, Result};

/// Quantile levels reported by [`SeriesSummary`].
pub const SUMMARY_PROBS: [f64; 5] = [0.025, 0.25, 0.5, 0.75, 0.975];

/// Type-7 (linear interpolation) quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantiles(series: &[f64], probs: &[f64]) -> Vec<f64> {
    let mut s = series.to_vec();
    s.sort_by(f64::total_cmp);
    probs.iter().map(|&p| quantile_sorted(&s, p)).collect()
}

pub fn mean(series: &[f64]) -> f64 {
    series.iter().sum::<f64>() / series.len() as f64
}

/// Sample standard deviation (divisor `n − 1`).
pub fn sd(series: &[f64]) -> f64 {
    let m = mean(series);
    let n = series.len();
    if n < 2 {
        return 0.0;
    }
    (series.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSummary {
    pub mean: f64,
    pub sd: f64,
    pub quantiles: Vec<f64>,
    /// `None` for constant or too-short series.
    pub iact: Option<f64>,
    pub ess: Option<f64>,
    pub n: usize,
}

impl SeriesSummary {
    pub fn new(series: &[f64]) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::arg("cannot summarise an empty series"));
        }
        let tau = iact(series).ok();
        Ok(Self {
            mean: mean(series),
            sd: sd(series),
            quantiles: quantiles(series, &SUMMARY_PROBS),
            iact: tau,
            ess: tau.map(|t| series.len() as f64 / t),
            n: series.len(),
        })
    }
}

/// `√(mean((θ_j − θ_true)²))`.
pub fn rmse(draws: &[f64], truth: f64) -> f64 {
    (draws.iter().map(|x| (x - truth).powi(2)).sum::<f64>() / draws.len() as f64).sqrt()
}

/// Per-margin RMSE; `draws[j]` is one draw of the whole vector.
pub fn rmse_vec(draws: &[Vec<f64>], truth: &[f64]) -> Vec<f64> {
    (0..truth.len())
        .map(|m| {
            let col: Vec<f64> = draws.iter().map(|d| d[m]).collect();
            rmse(&col, truth[m])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmseReport {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    /// Mean RMSE per group label.
    pub groups: Vec<(String, f64)>,
}

impl RmseReport {
    /// `series[m]` holds the draws of parameter `m`, `group[m]` its label.
    pub fn new(names: Vec<String>, series: &[Vec<f64>], truth: &[f64], group: &[String]) -> Result<Self> {
        if series.len() != truth.len() || names.len() != truth.len() || group.len() != truth.len() {
            return Err(Error::arg("RMSE report inputs disagree in length"));
        }
        let values: Vec<f64> = series.iter().zip(truth).map(|(s, &t)| rmse(s, t)).collect();
        let mut seen: Vec<String> = Vec::new();
        for g in group {
            if !seen.contains(g) {
                seen.push(g.clone());
            }
        }
        let groups = seen
            .into_iter()
            .map(|l| {
                let v: Vec<f64> = values.iter().zip(group).filter(|(_, g)| **g == l).map(|(v, _)| *v).collect();
                (l, mean(&v))
            })
            .collect();
        Ok(Self { names, values, groups })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_hand_values() {
        assert_eq!(rmse(&[1.5, 1.5, 1.5], 1.5), 0.0);
        assert_eq!(rmse(&[0.0, 2.0], 1.0), 1.0);
        let draws = vec![vec![0.0, 1.0], vec![2.0, 3.0]];
        let v = rmse_vec(&draws, &[1.0, 0.0]);
        assert_eq!(v, vec![rmse(&[0.0, 2.0], 1.0), rmse(&[1.0, 3.0], 0.0)]);
    }

    #[test]
    fn quantile_interpolation() {
        let q = quantiles(&[4.0, 1.0, 3.0, 2.0], &[0.0, 0.5, 1.0]);
        assert_eq!(q, vec![1.0, 2.5, 4.0]);
    }

    #[test]
    fn report_groups() {
        let r = RmseReport::new(
            vec!["a".into(), "b".into(), "c".into()],
            &[vec![0.0, 2.0], vec![1.0, 1.0], vec![3.0, 3.0]],
            &[1.0, 1.0, 1.0],
            &["x".into(), "y".into(), "x".into()],
        )
        .unwrap();
        assert_eq!(r.groups, vec![("x".into(), 1.5), ("y".into(), 0.0)]);
    }
}
