//! Unit-diagonal Cholesky reparameterisation of a correlation matrix.
//!
//! A correlation matrix `R` is written as `R = Λ^{-1/2} L Lᵀ Λ^{-1/2}` with
//! `L` lower triangular, ones on its diagonal, and `Λ = diag(L Lᵀ)`. The
//! strictly-lower entries of `L` are unconstrained, so HMC can move on them
//! freely while every point maps to a valid correlation matrix.
//!
//! Free entries are stored in row-major `vechL` order:
//! `L21, L31, L32, L41, L42, L43, ...`.

mod matrix;
mod partial;
mod target;

pub use matrix::{CorrelationMatrix, CovarianceMatrix};
pub use partial::{corr_to_partial, partial_to_corr};
pub use target::{log_prior_corr, log_target_cholesky, CorrTarget};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Number of strictly-lower-triangular entries of a `dim × dim` matrix.
#[inline]
pub fn vechl_len(dim: usize) -> usize {
    dim * dim.saturating_sub(1) / 2
}

/// Position of entry `(i, j)`, `i > j` (0-based), in row-major vechL order.
#[inline]
pub fn vechl_index(i: usize, j: usize) -> usize {
    debug_assert!(i > j);
    i * (i - 1) / 2 + j
}

/// Strict lower triangle of `m`, row by row.
pub fn vechl<T: Real>(m: &DMatrix<T>) -> Vec<T> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(vechl_len(d));
    for i in 1..d {
        for j in 0..i {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Symmetric matrix with the given strict lower triangle and constant diagonal.
pub fn symmetric_from_vechl<T: Real>(dim: usize, lower: &[T], diag: T) -> Result<DMatrix<T>> {
    if lower.len() != vechl_len(dim) {
        return Err(Error::arg(format!(
            "vechL of a {dim}x{dim} matrix has {} entries, got {}",
            vechl_len(dim),
            lower.len()
        )));
    }
    let mut m = DMatrix::from_diagonal_element(dim, dim, diag);
    for i in 1..dim {
        for j in 0..i {
            let v = lower[vechl_index(i, j)];
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Lower-triangular factor with an implicit unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCholesky<T = f64> {
    dim: usize,
    entries: Vec<T>,
}

impl<T: Real> UnitCholesky<T> {
    pub fn new(dim: usize, entries: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::arg("dimension must be at least 1"));
        }
        if entries.len() != vechl_len(dim) {
            return Err(Error::arg(format!(
                "expected {} free Cholesky entries for D={dim}, got {}",
                vechl_len(dim),
                entries.len()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("Cholesky entries"));
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![T::zero(); vechl_len(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Free entries in vechL order.
    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    /// Entry `(i, j)` of the full factor, including the unit diagonal.
    pub fn get(&self, i: usize, j: usize) -> T {
        match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.entries[vechl_index(i, j)],
            std::cmp::Ordering::Equal => T::one(),
            std::cmp::Ordering::Less => T::zero(),
        }
    }

    pub fn to_matrix(&self) -> DMatrix<T> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Squared row norms `‖l_i‖² = 1 + Σ_{j<i} L_ij²`, i.e. the diagonal of `L Lᵀ`.
    pub fn row_norms_sq(&self) -> Vec<T> {
        (0..self.dim)
            .map(|i| {
                (0..i).fold(T::one(), |acc, j| {
                    let v = self.entries[vechl_index(i, j)];
                    acc + v * v
                })
            })
            .collect()
    }

    /// The correlation matrix `r_ij = l_i·l_j / (‖l_i‖ ‖l_j‖)`.
    pub fn to_correlation(&self) -> CorrelationMatrix<T> {
        let d = self.dim;
        let inv_norm: Vec<T> = self
            .row_norms_sq()
            .into_iter()
            .map(|n2| T::one() / n2.sqrt())
            .collect();
        let mut r = DMatrix::identity(d, d);
        for i in 1..d {
            for j in 0..i {
                // rows i and j overlap on columns 0..=j; L_jj = 1
                let mut dot = self.entries[vechl_index(i, j)];
                for k in 0..j {
                    dot += self.entries[vechl_index(i, k)] * self.entries[vechl_index(j, k)];
                }
                let v = dot * inv_norm[i] * inv_norm[j];
                r[(i, j)] = v;
                r[(j, i)] = v;
            }
        }
        CorrelationMatrix::from_trusted(r)
    }

    /// Inverse map: Cholesky factor of `R` with each row divided by its diagonal entry.
    pub fn from_correlation(r: &CorrelationMatrix<T>) -> Result<Self> {
        let d = r.dim();
        let chol = r
            .as_matrix()
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidCorrelation("not positive definite".into()))?;
        let c = chol.l();
        let mut entries = Vec::with_capacity(vechl_len(d));
        for i in 1..d {
            let diag = c[(i, i)];
            for j in 0..i {
                entries.push(c[(i, j)] / diag);
            }
        }
        Self::new(d, entries)
    }

    /// `log|R|` through `|R| = Π_k ‖l_k‖⁻²` (the unit-diagonal factor has `|L Lᵀ| = 1`).
    pub fn log_det_correlation(&self) -> T {
        -self.row_norms_sq().into_iter().fold(T::zero(), |acc, n2| acc + n2.ln())
    }

    /// Log absolute Jacobian determinant of `vechL(L) ↦ vechL(R)`.
    ///
    /// The map is block lower triangular by rows of `L`; the row-`k` block
    /// contributes `‖l_k‖^{-(k+1)} Π_{j<k} ‖l_j‖⁻¹`, which collects to
    /// `Π_k ‖l_k‖^{-(D+1)}`, equivalently `|R|^{(D+1)/2}`.
    pub fn log_jacobian(&self) -> T {
        let exponent: T = lit::<T>((self.dim + 1) as f64) * lit(0.5);
        exponent * self.log_det_correlation()
    }
}

/// `R(L)`; total on finite inputs.
pub fn cholesky_to_corr<T: Real>(l: &UnitCholesky<T>) -> CorrelationMatrix<T> {
    l.to_correlation()
}

pub fn corr_to_cholesky<T: Real>(r: &CorrelationMatrix<T>) -> Result<UnitCholesky<T>> {
    UnitCholesky::from_correlation(r)
}

pub fn log_jacobian<T: Real>(l: &UnitCholesky<T>) -> T {
    l.log_jacobian()
}
