//! Conditional-independence graphs from posterior draws of a precision
//! matrix: an edge joins `i` and `j` when the equal-tailed credible interval
//! of entry `(i, j)` excludes zero.

use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use super::chain::ChainDraws;
use crate::corr::vechl_len;
use crate::diagnostics::{mean, quantiles};
use crate::error::{Error, Result};

/// Precision matrix whose entries define the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphMatrix {
    /// `R_ε⁻¹`: latent dependence given random effects and covariates.
    RInv,
    /// `Σ_α⁻¹`: dependence of the random effects.
    SigmaAlphaInv,
}

impl FromStr for GraphMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R_inv" | "r_inv" => Ok(Self::RInv),
            "Sigma_alpha_inv" | "sigma_alpha_inv" => Ok(Self::SigmaAlphaInv),
            _ => Err(Error::arg(format!("unknown matrix `{s}`; expected R_inv or Sigma_alpha_inv"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Pos,
    Neg,
}

/// Undirected edge `i < j` (zero-based).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub sign: Sign,
    pub weight: f64,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Draw series of each strictly lower-triangular entry of the chosen
/// precision matrix, row-major.
pub fn precision_series(draws: &ChainDraws, matrix: GraphMatrix) -> Result<Vec<Vec<f64>>> {
    let d = draws.outcomes();
    let mut out = vec![Vec::with_capacity(draws.len()); vechl_len(d)];
    for s in 0..draws.len() {
        let inv = match matrix {
            GraphMatrix::RInv => draws.r_eps_matrix(s)?.inverse()?,
            GraphMatrix::SigmaAlphaInv => draws.sigma_alpha_matrix(s)?.inverse()?,
        };
        let mut n = 0;
        for i in 1..d {
            for j in 0..i {
                out[n].push(inv[(i, j)]);
                n += 1;
            }
        }
    }
    Ok(out)
}

/// Edges from per-entry series in row-major lower-triangular order. Weight
/// is the absolute posterior mean.
pub fn extract_graph(entry_series: &[Vec<f64>], level: f64) -> Result<Vec<Edge>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::arg(format!("credible level must lie in (0, 1), got {level}")));
    }
    let mut dim = 1;
    while vechl_len(dim) < entry_series.len() {
        dim += 1;
    }
    if vechl_len(dim) != entry_series.len() {
        return Err(Error::arg(format!("{} series do not form a lower triangle", entry_series.len())));
    }
    let tail = (1.0 - level) / 2.0;
    let mut edges = Vec::new();
    let mut n = 0;
    for i in 1..dim {
        for j in 0..i {
            let s = &entry_series[n];
            n += 1;
            if s.is_empty() {
                return Err(Error::arg("empty draw series"));
            }
            let q = quantiles(s, &[tail, 1.0 - tail]);
            if q[0] > 0.0 || q[1] < 0.0 {
                let m = mean(s);
                edges.push(Edge {
                    i: j,
                    j: i,
                    sign: if m >= 0.0 { Sign::Pos } else { Sign::Neg },
                    weight: m.abs(),
                    mean: m,
                    lower: q[0],
                    upper: q[1],
                });
            }
        }
    }
    Ok(edges)
}

/// Graphviz rendering with `sign` and `weight` edge attributes.
pub fn graph_to_dot(edges: &[Edge], labels: &[String]) -> String {
    let mut s = String::from("graph G {\n");
    for l in labels {
        let _ = writeln!(s, "  \"{l}\";");
    }
    for e in edges {
        let sign = match e.sign {
            Sign::Pos => "pos",
            Sign::Neg => "neg",
        };
        let color = if e.sign == Sign::Pos { "blue" } else { "red" };
        let _ = writeln!(
            s,
            "  \"{}\" -- \"{}\" [sign={sign}, weight={:.16e}, color={color}];",
            labels[e.i], labels[e.j], e.weight
        );
    }
    s.push_str("}\n");
    s
}

pub fn write_edges_csv<W: Write>(edges: &[Edge], labels: &[String], w: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["from", "to", "sign", "weight", "mean", "lower", "upper"])?;
    for e in edges {
        let sign = if e.sign == Sign::Pos { "pos" } else { "neg" };
        w.write_record([
            labels[e.i].clone(),
            labels[e.j].clone(),
            sign.to_string(),
            format!("{:.16e}", e.weight),
            format!("{:.16e}", e.mean),
            format!("{:.16e}", e.lower),
            format!("{:.16e}", e.upper),
        ])?;
    }
    w.flush()?;
    Ok(())
}
