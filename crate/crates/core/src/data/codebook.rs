//! Categorical attributes and their dummy coding.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the constant column prepended to every design.
pub const INTERCEPT: &str = "Intercept";

const GP_CODEBOOK: &str = include_str!("gp_codebook.json");

/// One raw column of the input table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Attribute {
    /// Coded as one 0/1 column per non-base level, named after the level.
    Categorical {
        name: String,
        levels: Vec<String>,
        base: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        descriptions: Vec<String>,
    },
    /// Copied through as a single real column.
    Numeric { name: String },
}

impl Attribute {
    pub fn name(&self) -> &str {
        match self {
            Self::Categorical { name, .. } | Self::Numeric { name } => name,
        }
    }

    fn columns(&self) -> Vec<String> {
        match self {
            Self::Categorical { levels, base, .. } => levels.iter().filter(|l| *l != base).cloned().collect(),
            Self::Numeric { name } => vec![name.clone()],
        }
    }

    fn width(&self) -> usize {
        match self {
            Self::Categorical { levels, .. } => levels.len() - 1,
            Self::Numeric { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookSpec {
    pub attributes: Vec<Attribute>,
}

impl CodebookSpec {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self> {
        let cb = Self { attributes };
        cb.validate()?;
        Ok(cb)
    }

    /// The twelve patient attributes of the contraceptive-discussion survey.
    pub fn gp_survey() -> Self {
        serde_json::from_str(GP_CODEBOOK).expect("bundled codebook is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cb: Self = serde_json::from_str(text)?;
        cb.validate()?;
        Ok(cb)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for a in &self.attributes {
            if !seen.insert(a.name().to_string()) {
                return Err(Error::config(format!("attribute `{}` listed twice", a.name())));
            }
            if let Attribute::Categorical { name, levels, base, descriptions } = a {
                if levels.len() < 2 {
                    return Err(Error::config(format!("attribute `{name}` needs at least two levels")));
                }
                if !levels.contains(base) {
                    return Err(Error::config(format!("base level `{base}` of `{name}` is not one of its levels")));
                }
                if !descriptions.is_empty() && descriptions.len() != levels.len() {
                    return Err(Error::config(format!("attribute `{name}` has {} descriptions for {} levels", descriptions.len(), levels.len())));
                }
            }
        }
        let mut cols = std::collections::HashSet::new();
        for c in self.covariate_names() {
            if !cols.insert(c.clone()) {
                return Err(Error::config(format!("design column `{c}` produced twice")));
            }
        }
        Ok(())
    }

    /// Design column names, intercept first.
    pub fn covariate_names(&self) -> Vec<String> {
        std::iter::once(INTERCEPT.to_string())
            .chain(self.attributes.iter().flat_map(Attribute::columns))
            .collect()
    }

    /// Number of design columns including the intercept.
    pub fn width(&self) -> usize {
        1 + self.attributes.iter().map(Attribute::width).sum::<usize>()
    }

    /// The reference profile: every categorical attribute at its base level,
    /// numeric attributes at zero.
    pub fn base_case(&self) -> Vec<String> {
        self.attributes
            .iter()
            .map(|a| match a {
                Attribute::Categorical { base, .. } => base.clone(),
                Attribute::Numeric { .. } => "0".to_string(),
            })
            .collect()
    }

    /// Code one raw row, values in attribute order. `row` is only used in
    /// error messages.
    pub fn encode_row<S: AsRef<str>>(&self, row: usize, values: &[S]) -> Result<Vec<f64>> {
        if values.len() != self.attributes.len() {
            return Err(Error::Data {
                row,
                column: String::new(),
                message: format!("expected {} attribute values, found {}", self.attributes.len(), values.len()),
            });
        }
        let mut x = Vec::with_capacity(self.width());
        x.push(1.0);
        for (a, v) in self.attributes.iter().zip(values) {
            let v = v.as_ref().trim();
            match a {
                Attribute::Categorical { name, levels, base, .. } => {
                    if !levels.iter().any(|l| l == v) {
                        return Err(Error::Data {
                            row,
                            column: name.clone(),
                            message: format!("unknown level `{v}`"),
                        });
                    }
                    x.extend(levels.iter().filter(|l| *l != base).map(|l| if l == v { 1.0 } else { 0.0 }));
                }
                Attribute::Numeric { name } => {
                    let num: f64 = v.parse().map_err(|_| Error::Data {
                        row,
                        column: name.clone(),
                        message: format!("`{v}` is not a number"),
                    })?;
                    if !num.is_finite() {
                        return Err(Error::Data {
                            row,
                            column: name.clone(),
                            message: "value is not finite".into(),
                        });
                    }
                    x.push(num);
                }
            }
        }
        Ok(x)
    }

    /// Code a whole table. Columns are matched to attributes by header name;
    /// extra columns are ignored. Rows are numbered from 1 in errors.
    pub fn encode_categoricals(&self, table: &RawTable) -> Result<Vec<Vec<f64>>> {
        let idx = self
            .attributes
            .iter()
            .map(|a| {
                table.column(a.name()).ok_or_else(|| Error::Data {
                    row: 0,
                    column: a.name().to_string(),
                    message: "column missing from header".into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        table
            .rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let vals: Vec<&str> = idx.iter().map(|&c| row[c].as_str()).collect();
                self.encode_row(r + 1, &vals)
            })
            .collect()
    }

    /// Draw a raw profile: each categorical level with equal probability,
    /// numeric attributes standard normal.
    pub fn sample_row<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.width());
        x.push(1.0);
        for a in &self.attributes {
            match a {
                Attribute::Categorical { levels, base, .. } => {
                    let pick = &levels[rng.random_range(0..levels.len())];
                    x.extend(levels.iter().filter(|l| *l != base).map(|l| if l == pick { 1.0 } else { 0.0 }));
                }
                Attribute::Numeric { .. } => x.push(rng.sample(StandardNormal)),
            }
        }
        x
    }
}

/// String table as read from CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}
