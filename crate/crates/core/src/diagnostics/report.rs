//! Side-by-side IACT comparison of two runs of the same model.

use std::fmt;
use std::io::Write;

use serde::Serialize;

use super::{iact, mean};
use crate::error::{Error, Result};
use crate::inference::{ChainDraws, BLOCK_NAMES};

/// One block of the comparison. Ratios are `IACT_a / IACT_b` per margin;
/// margins that are constant in either run are skipped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IactRatioRow {
    pub block: String,
    pub margins: usize,
    pub mean_iact_a: f64,
    pub mean_iact_b: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub ratio_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IactRatioTable {
    pub label_a: String,
    pub label_b: String,
    pub rows: Vec<IactRatioRow>,
    pub seconds_per_iteration_a: f64,
    pub seconds_per_iteration_b: f64,
}

fn per_margin_iact(draws: &ChainDraws, block: &str) -> Result<Vec<Option<f64>>> {
    let b = draws
        .block(block)
        .ok_or_else(|| Error::arg(format!("block `{block}` was not stored")))?;
    Ok((0..b.width()).map(|j| iact(&b.series(j)).ok()).collect())
}

fn check_same_model(a: &ChainDraws, b: &ChainDraws) -> Result<()> {
    let (ma, mb) = (&a.meta, &b.meta);
    if ma.spec != mb.spec
        || ma.outcomes != mb.outcomes
        || ma.covariates != mb.covariates
        || ma.individuals != mb.individuals
        || ma.periods != mb.periods
    {
        return Err(Error::arg("the two runs do not share a model specification"));
    }
    Ok(())
}

/// Compare mixing block by block. `blocks` defaults to every stored block
/// when empty.
pub fn iact_ratio_report(
    draws_a: &ChainDraws,
    draws_b: &ChainDraws,
    blocks: &[&str],
    labels: (&str, &str),
) -> Result<IactRatioTable> {
    check_same_model(draws_a, draws_b)?;
    let names: Vec<&str> = if blocks.is_empty() {
        BLOCK_NAMES
            .iter()
            .copied()
            .filter(|n| draws_a.block(n).is_some_and(|b| b.width() > 0) && draws_b.block(n).is_some())
            .collect()
    } else {
        blocks.to_vec()
    };
    let mut rows = Vec::new();
    for name in names {
        let ia = per_margin_iact(draws_a, name)?;
        let ib = per_margin_iact(draws_b, name)?;
        if ia.len() != ib.len() {
            return Err(Error::arg(format!("block `{name}` has different widths in the two runs")));
        }
        let pairs: Vec<(f64, f64)> = ia.into_iter().zip(ib).filter_map(|(a, b)| Some((a?, b?))).collect();
        if pairs.is_empty() {
            continue;
        }
        let ratios: Vec<f64> = pairs.iter().map(|(a, b)| a / b).collect();
        rows.push(IactRatioRow {
            block: name.to_string(),
            margins: pairs.len(),
            mean_iact_a: mean(&pairs.iter().map(|p| p.0).collect::<Vec<_>>()),
            mean_iact_b: mean(&pairs.iter().map(|p| p.1).collect::<Vec<_>>()),
            ratio_min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
            ratio_max: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ratio_mean: mean(&ratios),
        });
    }
    Ok(IactRatioTable {
        label_a: labels.0.to_string(),
        label_b: labels.1.to_string(),
        rows,
        seconds_per_iteration_a: draws_a.meta.seconds_per_iteration,
        seconds_per_iteration_b: draws_b.meta.seconds_per_iteration,
    })
}

impl IactRatioTable {
    pub fn row(&self, block: &str) -> Option<&IactRatioRow> {
        self.rows.iter().find(|r| r.block == block)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record([
            "block".to_string(),
            "margins".into(),
            format!("mean_iact_{}", self.label_a),
            format!("mean_iact_{}", self.label_b),
            "ratio_min".into(),
            "ratio_max".into(),
            "ratio_mean".into(),
        ])?;
        for r in &self.rows {
            w.write_record([
                r.block.clone(),
                r.margins.to_string(),
                format!("{:.16e}", r.mean_iact_a),
                format!("{:.16e}", r.mean_iact_b),
                format!("{:.16e}", r.ratio_min),
                format!("{:.16e}", r.ratio_max),
                format!("{:.16e}", r.ratio_mean),
            ])?;
        }
        w.write_record([
            "seconds_per_iteration".to_string(),
            String::new(),
            format!("{:.16e}", self.seconds_per_iteration_a),
            format!("{:.16e}", self.seconds_per_iteration_b),
            String::new(),
            String::new(),
            String::new(),
        ])?;
        w.flush()?;
        Ok(())
    }
}

impl fmt::Display for IactRatioTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<18} {:>7} {:>12} {:>12} {:>10} {:>10} {:>10}",
            "block",
            "margins",
            format!("IACT {}", self.label_a),
            format!("IACT {}", self.label_b),
            "ratio min",
            "ratio max",
            "ratio mean"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<18} {:>7} {:>12.3} {:>12.3} {:>10.3} {:>10.3} {:>10.3}",
                r.block, r.margins, r.mean_iact_a, r.mean_iact_b, r.ratio_min, r.ratio_max, r.ratio_mean
            )?;
        }
        write!(
            f,
            "{:<18} {:>7} {:>12.3e} {:>12.3e}",
            "sec/iteration", "", self.seconds_per_iteration_a, self.seconds_per_iteration_b
        )
    }
}
