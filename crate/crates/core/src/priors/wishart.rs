//! Inverse-Wishart sampling (Bartlett) and the marginally uniform
//! correlation prior built on it.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::corr::{CorrelationMatrix, CovarianceMatrix};
use crate::error::{Error, Result};

/// Draw `Σ ~ IW(df, Ψ)` with density `∝ |Σ|^{-(df+D+1)/2} exp(-½ tr(Ψ Σ⁻¹))`.
///
/// With `Ψ = U Uᵀ` and Bartlett factor `A` of `W(df, I)`, `Σ = (U A⁻ᵀ)(U A⁻ᵀ)ᵀ`.
pub fn sample_inverse_wishart<R: Rng + ?Sized>(
    df: f64,
    scale: &CovarianceMatrix,
    rng: &mut R,
) -> Result<CovarianceMatrix> {
    let d = scale.dim();
    if !(df > d as f64 - 1.0) {
        return Err(Error::arg(format!(
            "inverse-Wishart degrees of freedom {df} must exceed D - 1 = {}",
            d as f64 - 1.0
        )));
    }
    let u = scale.cholesky()?.l();
    let mut a = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        let chi = ChiSquared::new(df - i as f64).map_err(|e| Error::arg(e.to_string()))?;
        a[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = rng.sample(StandardNormal);
        }
    }
    // Mᵀ = A⁻¹ Uᵀ
    let mt = a
        .solve_lower_triangular(&u.transpose())
        .ok_or(Error::Singular("Bartlett factor"))?;
    let m = mt.transpose();
    let mut sigma = &m * &mt;
    sigma = (&sigma + sigma.transpose()) * 0.5;
    Ok(CovarianceMatrix::from_trusted(sigma))
}

/// Draw `R` from the marginally uniform family by normalising `Σ ~ IW(ν, I)`.
///
/// For `ν = D + 1` every `r_ij` is marginally uniform on `(−1, 1)`.
pub fn sample_corr_marg_uniform<R: Rng + ?Sized>(dim: usize, nu: f64, rng: &mut R) -> Result<CorrelationMatrix> {
    if dim == 0 {
        return Err(Error::arg("dimension must be at least 1"));
    }
    if !(nu >= dim as f64) {
        return Err(Error::arg(format!("nu = {nu} must be at least D = {dim}")));
    }
    let sigma = sample_inverse_wishart(nu, &CovarianceMatrix::identity(dim), rng)?;
    Ok(sigma.to_correlation())
}

/// Scatter matrix `Σ_i a_i a_iᵀ`.
pub fn outer_sum(vectors: &[DVector<f64>], dim: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(dim, dim);
    for v in vectors {
        s.ger(1.0, v, v, 1.0);
    }
    s
}

/// Conjugate update `Σ_α ~ IW(λ + P, Σ α_i α_iᵀ + Ψ)`.
pub fn iw_update_sigma_alpha<R: Rng + ?Sized>(
    alphas: &[DVector<f64>],
    df: f64,
    scale: &CovarianceMatrix,
    rng: &mut R,
) -> Result<CovarianceMatrix> {
    let d = scale.dim();
    if alphas.iter().any(|a| a.len() != d) {
        return Err(Error::arg("random-effect vector length does not match scale matrix"));
    }
    let post_df = df + alphas.len() as f64;
    if !(post_df > d as f64 - 1.0) {
        return Err(Error::arg(format!(
            "improper inverse-Wishart posterior: df + P = {post_df} <= D - 1"
        )));
    }
    let post_scale = outer_sum(alphas, d) + scale.as_matrix();
    sample_inverse_wishart(post_df, &CovarianceMatrix::new(post_scale)?, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::ks::ks_statistic_cdf;
    use nalgebra::dmatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn iw_mean_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = CovarianceMatrix::new(dmatrix![2.0, 0.5, 0.0; 0.5, 1.0, -0.3; 0.0, -0.3, 1.5]).unwrap();
        let df = 9.0;
        let n = 100_000;
        let mut mean = DMatrix::<f64>::zeros(3, 3);
        let mut sq = DMatrix::<f64>::zeros(3, 3);
        for _ in 0..n {
            let s = iw_update_sigma_alpha(&[], df, &psi, &mut rng).unwrap().into_matrix();
            sq += s.component_mul(&s);
            mean += s;
        }
        mean /= n as f64;
        sq /= n as f64;
        let truth = psi.as_matrix() / (df - 3.0 - 1.0);
        for i in 0..3 {
            for j in 0..3 {
                let se = ((sq[(i, j)] - mean[(i, j)].powi(2)) / n as f64).sqrt();
                assert!((mean[(i, j)] - truth[(i, j)]).abs() < 3.0 * se + 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn one_dimensional_is_inverse_gamma() {
        // IW(df, psi) in 1-D is IG(df/2, psi/2): mean psi/(df-2), var mean^2 * 2/(df-4)
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (df, psi) = (12.0, 3.0);
        let scale = CovarianceMatrix::new(dmatrix![psi]).unwrap();
        let n = 200_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_inverse_wishart(df, &scale, &mut rng).unwrap().as_matrix()[(0, 0)])
            .collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        let mean = psi / (df - 2.0);
        let var = mean * mean * 2.0 / (df - 4.0);
        assert!((m - mean).abs() < 3.0 * (var / n as f64).sqrt());
        assert!((v / var - 1.0).abs() < 0.05);
    }

    #[test]
    fn improper_posterior_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = CovarianceMatrix::identity(3);
        assert!(iw_update_sigma_alpha(&[], 1.5, &psi, &mut rng).is_err());
    }

    #[test]
    fn degenerate_dimension_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = sample_corr_marg_uniform(1, 2.0, &mut rng).unwrap();
        assert_eq!(r.as_matrix()[(0, 0)], 1.0);
    }

    #[test]
    fn marginal_correlation_uniform_d3() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws: Vec<f64> = (0..20_000)
            .map(|_| sample_corr_marg_uniform(3, 4.0, &mut rng).unwrap().get(2, 0))
            .collect();
        let ks = ks_statistic_cdf(&draws, |x| (x + 1.0) / 2.0);
        assert!(ks.p_value > 0.01, "{ks:?}");
    }
}
