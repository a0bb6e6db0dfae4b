use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

fn symmetry_tol<T: Real>() -> T {
    let eps = T::default_epsilon() * lit(100.0);
    if eps > lit(1e-12) {
        eps
    } else {
        lit(1e-12)
    }
}

fn check_square_symmetric<T: Real>(m: &DMatrix<T>, what: &str) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::arg(format!("{what} must be a non-empty square matrix")));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("matrix entries"));
    }
    let tol = symmetry_tol::<T>();
    let d = m.nrows();
    for i in 0..d {
        for j in 0..i {
            let scale = T::one().max(m[(i, j)].abs());
            if (m[(i, j)] - m[(j, i)]).abs() > tol * scale {
                return Err(Error::arg(format!("{what} is not symmetric at ({i},{j})")));
            }
        }
    }
    Ok(())
}

fn symmetrize<T: Real>(m: &mut DMatrix<T>) {
    let d = m.nrows();
    for i in 0..d {
        for j in 0..i {
            let v = (m[(i, j)] + m[(j, i)]) * lit(0.5);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Symmetric positive-definite matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix<T = f64>(DMatrix<T>);

impl<T: Real> CorrelationMatrix<T> {
    /// Validates symmetry, unit diagonal, `|r_ij| < 1` and positive definiteness.
    /// The diagonal is then set to exactly one.
    pub fn new(mut m: DMatrix<T>) -> Result<Self> {
        check_square_symmetric(&m, "correlation matrix")?;
        let tol = symmetry_tol::<T>();
        let d = m.nrows();
        for i in 0..d {
            if (m[(i, i)] - T::one()).abs() > tol {
                return Err(Error::InvalidCorrelation(format!("diagonal entry {i} is not 1")));
            }
            m[(i, i)] = T::one();
            for j in 0..i {
                if m[(i, j)].abs() >= T::one() {
                    return Err(Error::InvalidCorrelation(format!(
                        "|r_{i}{j}| must be below 1"
                    )));
                }
            }
        }
        symmetrize(&mut m);
        if m.clone().cholesky().is_none() {
            return Err(Error::InvalidCorrelation("not positive definite".into()));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix built by a map whose output is a correlation matrix by
    /// construction.
    pub(crate) fn from_trusted(m: DMatrix<T>) -> Self {
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.0
    }

    pub fn cholesky(&self) -> Result<Cholesky<T, Dyn>> {
        self.0
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite("correlation matrix"))
    }

    pub fn inverse(&self) -> Result<DMatrix<T>> {
        Ok(self.cholesky()?.inverse())
    }

    /// Normalises a covariance matrix: `S⁻¹ Σ S⁻¹` with `S = sqrt(diag Σ)`.
    pub fn from_covariance(cov: &CovarianceMatrix<T>) -> Self {
        let m = cov.as_matrix();
        let d = m.nrows();
        let s: Vec<T> = (0..d).map(|i| T::one() / m[(i, i)].sqrt()).collect();
        let mut r = DMatrix::from_fn(d, d, |i, j| m[(i, j)] * s[i] * s[j]);
        for i in 0..d {
            r[(i, i)] = T::one();
        }
        Self(r)
    }

    /// Strict lower triangle in vechL order.
    pub fn vechl(&self) -> Vec<T> {
        super::vechl(&self.0)
    }

    pub fn from_vechl(dim: usize, lower: &[T]) -> Result<Self> {
        Self::new(super::symmetric_from_vechl(dim, lower, T::one())?)
    }
}

/// Symmetric positive-definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix<T = f64>(DMatrix<T>);

impl<T: Real> CovarianceMatrix<T> {
    pub fn new(mut m: DMatrix<T>) -> Result<Self> {
        check_square_symmetric(&m, "covariance matrix")?;
        symmetrize(&mut m);
        if m.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite("covariance matrix"));
        }
        Ok(Self(m))
    }

    pub(crate) fn from_trusted(m: DMatrix<T>) -> Self {
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.0
    }

    pub fn cholesky(&self) -> Result<Cholesky<T, Dyn>> {
        self.0
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite("covariance matrix"))
    }

    pub fn inverse(&self) -> Result<DMatrix<T>> {
        Ok(self.cholesky()?.inverse())
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self.0[(i, i)]).collect()
    }

    pub fn to_correlation(&self) -> CorrelationMatrix<T> {
        CorrelationMatrix::from_covariance(self)
    }
}

impl<T: Real> From<CorrelationMatrix<T>> for CovarianceMatrix<T> {
    fn from(r: CorrelationMatrix<T>) -> Self {
        Self(r.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn correlation_validation() {
        assert!(CorrelationMatrix::new(dmatrix![1.0, 0.5; 0.5, 1.0]).is_ok());
        assert!(CorrelationMatrix::new(dmatrix![1.0, 0.5; 0.4, 1.0]).is_err());
        assert!(CorrelationMatrix::new(dmatrix![1.1, 0.5; 0.5, 1.0]).is_err());
        assert!(CorrelationMatrix::new(dmatrix![1.0, 1.0; 1.0, 1.0]).is_err());
        // valid entries but indefinite
        let bad = dmatrix![1.0, 0.9, -0.9; 0.9, 1.0, 0.9; -0.9, 0.9, 1.0];
        assert!(CorrelationMatrix::new(bad).is_err());
    }

    #[test]
    fn covariance_normalises_to_correlation() {
        let s = CovarianceMatrix::new(dmatrix![4.0_f64, 1.0; 1.0, 1.0]).unwrap();
        let r = s.to_correlation();
        assert!((r.get(0, 1) - 0.5).abs() < 1e-15);
        assert_eq!(r.get(0, 0), 1.0);
        assert!(CovarianceMatrix::new(dmatrix![1.0, 2.0; 2.0, 1.0]).is_err());
    }
}
