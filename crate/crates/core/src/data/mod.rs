//! Balanced binary panels, their CSV form, and simulation from the model.

pub mod codebook;
pub mod paper;
mod simulate;

pub use codebook::{Attribute, CodebookSpec, RawTable, INTERCEPT};
pub use simulate::{simulate_panel, CovariateGenerator, SimulatedPanel, TrueParams};

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `D` binary outcomes for `P` individuals over `T` periods, with an
/// observation-level design (`K` columns, the first constant 1) and optional
/// individual-level covariates `z_i` (`G` columns).
///
/// Cells are ordered individual-major: cell `c = i T + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelData {
    individuals: usize,
    periods: usize,
    outcome_names: Vec<String>,
    covariate_names: Vec<String>,
    individual_names: Vec<String>,
    ids: Vec<String>,
    y: Vec<u8>,
    x: Vec<f64>,
    z: Vec<f64>,
}

impl PanelData {
    /// `y[c D + d]` and `x[c K + k]`. Column 0 of `x` must be all ones.
    pub fn new(
        individuals: usize,
        periods: usize,
        outcome_names: Vec<String>,
        covariate_names: Vec<String>,
        y: Vec<u8>,
        x: Vec<f64>,
    ) -> Result<Self> {
        let (d, k) = (outcome_names.len(), covariate_names.len());
        let cells = individuals * periods;
        if d == 0 || k == 0 {
            return Err(Error::arg("a panel needs at least one outcome and one covariate"));
        }
        if periods == 0 {
            return Err(Error::arg("a panel needs at least one period"));
        }
        if y.len() != cells * d || x.len() != cells * k {
            return Err(Error::arg("outcome or design array does not match the panel shape"));
        }
        if y.iter().any(|&v| v > 1) {
            return Err(Error::arg("outcomes must be 0 or 1"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix"));
        }
        if (0..cells).any(|c| x[c * k] != 1.0) {
            return Err(Error::arg("the first design column must be the constant 1"));
        }
        Ok(Self {
            individuals,
            periods,
            outcome_names,
            covariate_names,
            individual_names: Vec::new(),
            ids: (1..=individuals).map(|i| i.to_string()).collect(),
            y,
            x,
            z: Vec::new(),
        })
    }

    /// Attach individual-level covariates, `z[i G + g]`.
    pub fn with_individual_covariates(mut self, names: Vec<String>, z: Vec<f64>) -> Result<Self> {
        if z.len() != self.individuals * names.len() {
            return Err(Error::arg("individual covariate array does not match the panel shape"));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("individual covariates"));
        }
        self.individual_names = names;
        self.z = z;
        Ok(self)
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.individuals {
            return Err(Error::arg("one identifier per individual is required"));
        }
        self.ids = ids;
        Ok(self)
    }

    pub fn individuals(&self) -> usize {
        self.individuals
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn outcomes(&self) -> usize {
        self.outcome_names.len()
    }

    pub fn covariates(&self) -> usize {
        self.covariate_names.len()
    }

    pub fn individual_covariates(&self) -> usize {
        self.individual_names.len()
    }

    pub fn cells(&self) -> usize {
        self.individuals * self.periods
    }

    pub fn outcome_names(&self) -> &[String] {
        &self.outcome_names
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn individual_covariate_names(&self) -> &[String] {
        &self.individual_names
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    #[inline]
    pub fn cell(&self, i: usize, t: usize) -> usize {
        i * self.periods + t
    }

    /// Outcomes of cell `c`.
    #[inline]
    pub fn y_cell(&self, c: usize) -> &[u8] {
        let d = self.outcomes();
        &self.y[c * d..(c + 1) * d]
    }

    /// Design row of cell `c`.
    #[inline]
    pub fn x_cell(&self, c: usize) -> &[f64] {
        let k = self.covariates();
        &self.x[c * k..(c + 1) * k]
    }

    pub fn z_row(&self, i: usize) -> &[f64] {
        let g = self.individual_covariates();
        &self.z[i * g..(i + 1) * g]
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Replace the outcome array, keeping the design.
    pub fn set_outcomes(&mut self, y: Vec<u8>) -> Result<()> {
        if y.len() != self.y.len() || y.iter().any(|&v| v > 1) {
            return Err(Error::arg("replacement outcomes do not fit the panel"));
        }
        self.y = y;
        Ok(())
    }

    /// Fold `z_i` into the design: every cell of individual `i` gets
    /// `[x_it, z_i]`, so the extended model is a plain regression on the
    /// wider design.
    pub fn augmented(&self) -> PanelData {
        if self.individual_names.is_empty() {
            return self.clone();
        }
        let (k, g) = (self.covariates(), self.individual_covariates());
        let mut x = Vec::with_capacity(self.cells() * (k + g));
        for c in 0..self.cells() {
            x.extend_from_slice(self.x_cell(c));
            x.extend_from_slice(self.z_row(c / self.periods));
        }
        let mut names = self.covariate_names.clone();
        names.extend(self.individual_names.iter().cloned());
        PanelData {
            covariate_names: names,
            individual_names: Vec::new(),
            x,
            z: Vec::new(),
            ..self.clone()
        }
    }

    /// Share of ones per outcome.
    pub fn outcome_rates(&self) -> Vec<f64> {
        let d = self.outcomes();
        let mut s = vec![0.0; d];
        for c in 0..self.cells() {
            for (a, &v) in s.iter_mut().zip(self.y_cell(c)) {
                *a += v as f64;
            }
        }
        s.iter().map(|v| v / self.cells() as f64).collect()
    }

    /// Long CSV: `individual, period, <outcomes>, <covariates without the
    /// intercept>, <individual covariates>`, one row per cell. Values use the
    /// shortest representation that parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["individual".to_string(), "period".to_string()];
        header.extend(self.outcome_names.iter().cloned());
        header.extend(self.covariate_names[1..].iter().cloned());
        header.extend(self.individual_names.iter().cloned());
        out.write_record(&header)?;
        for i in 0..self.individuals {
            for t in 0..self.periods {
                let c = self.cell(i, t);
                let mut rec = vec![self.ids[i].clone(), (t + 1).to_string()];
                rec.extend(self.y_cell(c).iter().map(|v| v.to_string()));
                rec.extend(self.x_cell(c)[1..].iter().map(|v| v.to_string()));
                rec.extend(self.z_row(i).iter().map(|v| v.to_string()));
                out.write_record(&rec)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Read a long CSV. See [`CsvLayout`] for how columns are assigned.
    pub fn read_csv<R: Read>(r: R, layout: &CsvLayout) -> Result<Self> {
        let table = read_raw_table(r)?;
        from_table(&table, layout)
    }
}

/// How the columns of a long CSV map onto a panel.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsvLayout {
    /// Outcome columns, in order.
    pub outcomes: Vec<String>,
    /// Columns constant within an individual, used as `z_i`.
    pub individual_covariates: Vec<String>,
    /// Codes the attribute columns. Without one, every remaining column is
    /// numeric.
    pub codebook: Option<CodebookSpec>,
}

pub fn read_raw_table<R: Read>(r: R) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
    Ok(RawTable { headers, rows })
}

fn missing(column: &str) -> Error {
    Error::Data {
        row: 0,
        column: column.to_string(),
        message: "column missing from header".into(),
    }
}

fn parse_num(row: usize, column: &str, v: &str) -> Result<f64> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(Error::Data {
            row,
            column: column.to_string(),
            message: format!("`{v}` is not a finite number"),
        }),
    }
}

/// Rows may come in any order; individuals are numbered by first appearance
/// and periods are kept in file order within each individual.
fn from_table(table: &RawTable, layout: &CsvLayout) -> Result<PanelData> {
    let col = |n: &str| table.column(n).ok_or_else(|| missing(n));
    let id_col = col("individual")?;
    let period_col = col("period")?;
    if layout.outcomes.is_empty() {
        return Err(Error::config("layout lists no outcome columns"));
    }
    let y_cols = layout.outcomes.iter().map(|n| col(n)).collect::<Result<Vec<_>>>()?;
    let z_cols = layout.individual_covariates.iter().map(|n| col(n)).collect::<Result<Vec<_>>>()?;

    let (names, design): (Vec<String>, Vec<Vec<f64>>) = match &layout.codebook {
        Some(cb) => (cb.covariate_names(), cb.encode_categoricals(table)?),
        None => {
            let used: Vec<usize> = [id_col, period_col].into_iter().chain(y_cols.iter().copied()).chain(z_cols.iter().copied()).collect();
            let x_cols: Vec<usize> = (0..table.headers.len()).filter(|c| !used.contains(c)).collect();
            let mut names = vec![INTERCEPT.to_string()];
            names.extend(x_cols.iter().map(|&c| table.headers[c].clone()));
            let rows = table
                .rows
                .iter()
                .enumerate()
                .map(|(r, row)| {
                    let mut x = vec![1.0];
                    for &c in &x_cols {
                        x.push(parse_num(r + 1, &table.headers[c], &row[c])?);
                    }
                    Ok(x)
                })
                .collect::<Result<Vec<_>>>()?;
            (names, rows)
        }
    };

    let mut order: Vec<String> = Vec::new();
    let mut by_id: HashMap<String, Vec<usize>> = HashMap::new();
    for (r, row) in table.rows.iter().enumerate() {
        let id = &row[id_col];
        by_id
            .entry(id.clone())
            .or_insert_with(|| {
                order.push(id.clone());
                Vec::new()
            })
            .push(r);
    }
    let p = order.len();
    if p == 0 {
        return Err(Error::Data {
            row: 0,
            column: String::new(),
            message: "no data rows".into(),
        });
    }
    let t = by_id[&order[0]].len();
    let (d, g) = (y_cols.len(), z_cols.len());
    let mut y = Vec::with_capacity(p * t * d);
    let mut x = Vec::with_capacity(p * t * names.len());
    let mut z = Vec::with_capacity(p * g);
    for id in &order {
        let rows = &by_id[id];
        if rows.len() != t {
            return Err(Error::Data {
                row: rows[0] + 1,
                column: "individual".into(),
                message: format!("individual `{id}` has {} periods, expected {t} (balanced panel)", rows.len()),
            });
        }
        let mut periods = std::collections::HashSet::new();
        for &r in rows {
            let row = &table.rows[r];
            if !periods.insert(row[period_col].clone()) {
                return Err(Error::Data {
                    row: r + 1,
                    column: "period".into(),
                    message: format!("period `{}` repeated for individual `{id}`", row[period_col]),
                });
            }
            for (&c, name) in y_cols.iter().zip(&layout.outcomes) {
                y.push(match row[c].as_str() {
                    "0" => 0,
                    "1" => 1,
                    v => {
                        return Err(Error::Data {
                            row: r + 1,
                            column: name.clone(),
                            message: format!("outcome must be 0 or 1, found `{v}`"),
                        })
                    }
                });
            }
            x.extend_from_slice(&design[r]);
        }
        for (&c, name) in z_cols.iter().zip(&layout.individual_covariates) {
            let first = parse_num(rows[0] + 1, name, &table.rows[rows[0]][c])?;
            for &r in &rows[1..] {
                if parse_num(r + 1, name, &table.rows[r][c])? != first {
                    return Err(Error::Data {
                        row: r + 1,
                        column: name.clone(),
                        message: format!("individual covariate varies within individual `{id}`"),
                    });
                }
            }
            z.push(first);
        }
    }
    PanelData::new(p, t, layout.outcomes.clone(), names, y, x)?
        .with_individual_covariates(layout.individual_covariates.clone(), z)?
        .with_ids(order)
}
