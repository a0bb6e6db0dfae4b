//! Partial correlations `ρ_kl = −P_kl / √(P_kk P_ll)` with `P = R⁻¹`.

use nalgebra::DMatrix;

use super::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Matrix of partial correlations given all other variables. Unit diagonal.
pub fn corr_to_partial<T: Real>(r: &CorrelationMatrix<T>) -> Result<DMatrix<T>> {
    let p = r.inverse()?;
    Ok(precision_to_partial(&p))
}

/// Same map applied to an arbitrary precision matrix.
pub fn precision_to_partial<T: Real>(p: &DMatrix<T>) -> DMatrix<T> {
    let d = p.nrows();
    let s: Vec<T> = (0..d).map(|k| p[(k, k)].sqrt()).collect();
    DMatrix::from_fn(d, d, |k, l| {
        if k == l {
            T::one()
        } else {
            -p[(k, l)] / (s[k] * s[l])
        }
    })
}

/// Inverse of [`corr_to_partial`]: rebuilds `P` from the partials and its
/// diagonal, inverts, and rescales to unit diagonal.
pub fn partial_to_corr<T: Real>(partials: &DMatrix<T>, precision_diag: &[T]) -> Result<CorrelationMatrix<T>> {
    let d = partials.nrows();
    if !partials.is_square() || precision_diag.len() != d {
        return Err(Error::arg("partial matrix and precision diagonal disagree in size"));
    }
    if precision_diag.iter().any(|&v| !(v > T::zero())) {
        return Err(Error::arg("precision diagonal must be positive"));
    }
    let s: Vec<T> = precision_diag.iter().map(|v| v.sqrt()).collect();
    let p = DMatrix::from_fn(d, d, |k, l| {
        if k == l {
            precision_diag[k]
        } else {
            -partials[(k, l)] * s[k] * s[l]
        }
    });
    let cov = p
        .cholesky()
        .ok_or(Error::NotPositiveDefinite("rebuilt precision matrix"))?
        .inverse();
    let sd: Vec<T> = (0..d).map(|k| cov[(k, k)].sqrt()).collect();
    let r = DMatrix::from_fn(d, d, |k, l| if k == l { T::one() } else { cov[(k, l)] / (sd[k] * sd[l]) });
    CorrelationMatrix::new(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn identity_has_zero_partials() {
        let p = corr_to_partial(&CorrelationMatrix::<f64>::identity(4)).unwrap();
        assert_eq!(p, DMatrix::identity(4, 4));
    }

    #[test]
    fn two_dimensional_partial_is_r() {
        let r = CorrelationMatrix::new(dmatrix![1.0_f64, -0.37; -0.37, 1.0]).unwrap();
        let p = corr_to_partial(&r).unwrap();
        assert!((p[(0, 1)] + 0.37).abs() < 1e-14);
    }

    #[test]
    fn exchangeable_half() {
        let r = CorrelationMatrix::new(dmatrix![1.0_f64, 0.5, 0.5; 0.5, 1.0, 0.5; 0.5, 0.5, 1.0]).unwrap();
        let p = corr_to_partial(&r).unwrap();
        for (k, l) in [(0, 1), (0, 2), (1, 2)] {
            assert!((p[(k, l)] - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn round_trip() {
        let r = CorrelationMatrix::new(dmatrix![
            1.0, 0.3, -0.2, 0.1;
            0.3, 1.0, 0.4, -0.5;
            -0.2, 0.4, 1.0, 0.25;
            0.1, -0.5, 0.25, 1.0
        ])
        .unwrap();
        let prec = r.inverse().unwrap();
        let partial = corr_to_partial(&r).unwrap();
        let diag: Vec<f64> = (0..4).map(|k| prec[(k, k)]).collect();
        let back = partial_to_corr(&partial, &diag).unwrap();
        assert!((back.as_matrix() - r.as_matrix()).amax() < 1e-10);
    }
}
