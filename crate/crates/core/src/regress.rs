//! Sample-space regression primitives.
//!
//! All products here are raw (uncentered) inner products `u.v = sum_i u_i v_i`
//! and no regression carries an intercept unless explicitly requested. The
//! closed-form bias and variance expressions checked elsewhere in the crate
//! were derived under exactly this convention, so the primitives must not
//! silently center or de-mean anything.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::PolyCoeffs;

/// Default t-statistic threshold for the ratio-estimator mean guard.
pub const DEFAULT_RATIO_TSTAT_TOL: f64 = 4.0;

/// Default per-sample tolerance for instrumental denominators:
/// `|r.m| < NEAR_POLE_TOL_PER_SAMPLE * n` is declared near-pole.
pub const NEAR_POLE_TOL_PER_SAMPLE: f64 = 1e-8;

/// How a residual vector was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualSource {
    /// OLS regression residual `y - OLS[y|x] x` (the c-residual when y=M, x=X).
    Rc,
    /// Ratio-improved residual `M - (c + r) X`.
    Rr,
    /// Prior-instrument residual `M - (c_iv + r) X`.
    Rv,
    /// Polynomial-regression residual of the nonlinear estimator.
    NonlinearRr,
}

/// A residual vector tagged with its construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub values: Vec<f64>,
    pub source: ResidualSource,
}

/// Uncentered inner product.
pub fn dot(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    if u.is_empty() {
        return Err(Error::SampleSize { n: 0, min: 1 });
    }
    Ok(u.iter().zip(v).map(|(a, b)| a * b).sum())
}

/// OLS slope through the origin: `y.x / x.x`.
pub fn ols_slope(y: &[f64], x: &[f64]) -> Result<f64> {
    let xx = dot(x, x)?;
    if xx == 0.0 {
        return Err(Error::DegenerateRegressor);
    }
    Ok(dot(y, x)? / xx)
}

/// Regression residual `y - OLS[y|x] x`; orthogonal to x by construction.
pub fn residual(y: &[f64], x: &[f64]) -> Result<Residual> {
    let slope = ols_slope(y, x)?;
    let values = y.iter().zip(x).map(|(yi, xi)| yi - slope * xi).collect();
    Ok(Residual {
        values,
        source: ResidualSource::Rc,
    })
}

/// Ratio estimator for eps/d: `mean(m - c x) / mean(x)`.
///
/// Requires the confounder mean to be nonzero; the guard rejects inputs
/// whose sample mean is within `tol` standard errors of zero.
pub fn ratio_eps_over_d(m: &[f64], x: &[f64], c: f64) -> Result<f64> {
    ratio_eps_over_d_with_tol(m, x, c, DEFAULT_RATIO_TSTAT_TOL)
}

/// As [`ratio_eps_over_d`] with an explicit t-statistic threshold.
pub fn ratio_eps_over_d_with_tol(m: &[f64], x: &[f64], c: f64, tol: f64) -> Result<f64> {
    if m.len() != x.len() {
        return Err(Error::LengthMismatch {
            left: m.len(),
            right: x.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::SampleSize { n, min: 2 });
    }
    let mean_x = x.iter().sum::<f64>() / n as f64;
    let var_x = x.iter().map(|v| (v - mean_x) * (v - mean_x)).sum::<f64>() / (n - 1) as f64;
    let threshold = tol * (var_x / n as f64).sqrt();
    if mean_x == 0.0 || mean_x.abs() < threshold {
        return Err(Error::UnstableDenominator {
            mean_abs: mean_x.abs(),
            threshold,
        });
    }
    let mean_num = m.iter().zip(x).map(|(mi, xi)| mi - c * xi).sum::<f64>() / n as f64;
    Ok(mean_num / mean_x)
}

/// Least-squares fit of `r` on the monomials x^1..x^order (no constant term).
///
/// Solved via column-scaled normal equations with a Cholesky factorization;
/// the column scaling plus the factorization failure double as the
/// conditioning guard, surfacing rank-deficient designs as errors.
pub fn poly_regress(r: &[f64], x: &[f64], order: usize) -> Result<PolyCoeffs> {
    let (_, coeffs) = poly_fit(r, x, order, false)?;
    PolyCoeffs::new(coeffs)
}

/// As [`poly_regress`] but with a fitted intercept, returned separately.
pub fn poly_regress_with_intercept(
    r: &[f64],
    x: &[f64],
    order: usize,
) -> Result<(f64, PolyCoeffs)> {
    let (intercept, coeffs) = poly_fit(r, x, order, true)?;
    Ok((intercept, PolyCoeffs::new(coeffs)?))
}

/// Shared monomial least-squares core. Returns (intercept, c1..c_order).
fn poly_fit(r: &[f64], x: &[f64], order: usize, intercept: bool) -> Result<(f64, Vec<f64>)> {
    if r.len() != x.len() {
        return Err(Error::LengthMismatch {
            left: r.len(),
            right: x.len(),
        });
    }
    if order < 1 {
        return Err(Error::InvalidParameter(
            "polynomial order must be >= 1".into(),
        ));
    }
    let n = x.len();
    let k = order + usize::from(intercept);
    if n <= k {
        return Err(Error::SampleSize { n, min: k + 1 });
    }

    // design columns: optional 1, then x, x^2, .., x^order
    let mut design = DMatrix::zeros(n, k);
    for i in 0..n {
        let mut col = 0;
        if intercept {
            design[(i, col)] = 1.0;
            col += 1;
        }
        let mut p = 1.0;
        for _ in 0..order {
            p *= x[i];
            design[(i, col)] = p;
            col += 1;
        }
    }
    // scale columns to unit norm before forming the Gram matrix
    let mut scales = vec![0.0f64; k];
    for j in 0..k {
        let norm = design.column(j).norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::SingularDesign { order });
        }
        scales[j] = norm;
        for i in 0..n {
            design[(i, j)] /= norm;
        }
    }
    let rv = DVector::from_column_slice(r);
    let gram = design.transpose() * &design;
    let rhs = design.transpose() * rv;
    let chol = gram.cholesky().ok_or(Error::SingularDesign { order })?;
    let sol = chol.solve(&rhs);
    let mut coeffs: Vec<f64> = sol.iter().zip(&scales).map(|(b, s)| b / s).collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::SingularDesign { order });
    }
    let icept = if intercept { coeffs.remove(0) } else { 0.0 };
    Ok((icept, coeffs))
}

/// Numerator and denominator of the scalar instrumental ratio, unguarded.
pub(crate) fn iv_parts(r: &[f64], m: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    Ok((dot(r, y)?, dot(r, m)?))
}

/// Scalar instrumental estimate `r.y / r.m` (the two OLS normalizers cancel).
///
/// Errors with [`Error::NearPole`] when `|r.m|` falls below
/// `NEAR_POLE_TOL_PER_SAMPLE * n`.
pub fn iv_estimate(r: &Residual, m: &[f64], y: &[f64]) -> Result<f64> {
    iv_estimate_with_tol(r, m, y, NEAR_POLE_TOL_PER_SAMPLE)
}

/// As [`iv_estimate`] with an explicit per-sample denominator tolerance.
pub fn iv_estimate_with_tol(
    r: &Residual,
    m: &[f64],
    y: &[f64],
    tol_per_sample: f64,
) -> Result<f64> {
    let (num, den) = iv_parts(&r.values, m, y)?;
    let threshold = tol_per_sample * r.values.len() as f64;
    if den.abs() < threshold {
        return Err(Error::NearPole {
            denom_abs: den.abs(),
            threshold,
        });
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_linear_cmm, ModelParams};
    use proptest::prelude::*;

    #[test]
    fn dot_examples() {
        assert_eq!(dot(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        assert_eq!(dot(&[5.0, -2.0, 7.0], &[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(dot(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 14.0);
        assert!(matches!(
            dot(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn ols_slope_exact_proportionality() {
        let x = [1.0, 2.0, 3.0];
        let y = [2.0, 4.0, 6.0];
        assert!((ols_slope(&y, &x).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(
            ols_slope(&y, &[0.0, 0.0, 0.0]),
            Err(Error::DegenerateRegressor)
        ));
    }

    #[test]
    fn ols_slope_confounded_limit() {
        // slope of M on X converges to c + d eps var_w / (d^2 var_w + var_x);
        // zero-mean confounder so the closed form applies as written
        let p = ModelParams {
            mu_w: 0.0,
            ..ModelParams::unit()
        };
        let ds = sample_linear_cmm(&p, 1_000_000, 17).unwrap();
        let slope = ols_slope(&ds.m, &ds.x).unwrap();
        assert!((slope - 1.5).abs() < 0.01, "slope = {slope}");
    }

    #[test]
    fn residual_of_proportional_data_is_zero() {
        let x = [1.0, 2.0, 3.0];
        let y = [3.0, 6.0, 9.0];
        let r = residual(&y, &x).unwrap();
        assert!(r.values.iter().all(|v| v.abs() < 1e-12));
        assert_eq!(r.source, ResidualSource::Rc);
    }

    #[test]
    fn residual_correlates_with_confounder() {
        // with eps != 0 the residual stays centered-correlated with W
        let p = ModelParams::unit();
        let ds = sample_linear_cmm(&p, 1_000_000, 23).unwrap();
        let r = residual(&ds.m, &ds.x).unwrap();
        let n = ds.n as f64;
        let mean_r = r.values.iter().sum::<f64>() / n;
        let mean_w = ds.w.iter().sum::<f64>() / n;
        let cov: f64 = r
            .values
            .iter()
            .zip(&ds.w)
            .map(|(ri, wi)| (ri - mean_r) * (wi - mean_w))
            .sum::<f64>()
            / (n - 1.0);
        assert!(cov > 0.0, "Cov(R_c, W) = {cov}");
    }

    #[test]
    fn ratio_noiseless_identity() {
        // W = 1, d = 2, c = 1, eps = 3: X = [2,2], M = [5,5] -> 1.5
        let x = [2.0, 2.0];
        let m = [5.0, 5.0];
        assert_eq!(ratio_eps_over_d(&m, &x, 1.0).unwrap(), 1.5);
    }

    #[test]
    fn ratio_converges() {
        let p = ModelParams {
            eps: 0.5,
            ..ModelParams::unit()
        };
        let ds = sample_linear_cmm(&p, 1_000_000, 31).unwrap();
        let r = ratio_eps_over_d(&ds.m, &ds.x, p.c).unwrap();
        assert!((r - 0.5).abs() < 0.01, "ratio = {r}");
    }

    #[test]
    fn ratio_rejects_zero_mean_treatment() {
        let p = ModelParams {
            mu_w: 0.0,
            ..ModelParams::unit()
        };
        let ds = sample_linear_cmm(&p, 10_000, 3).unwrap();
        assert!(matches!(
            ratio_eps_over_d(&ds.m, &ds.x, p.c),
            Err(Error::UnstableDenominator { .. })
        ));
    }

    #[test]
    fn poly_regress_recovers_exact_polynomials() {
        let x: Vec<f64> = (0..200).map(|i| -1.0 + i as f64 / 100.0).collect();
        let r: Vec<f64> = x.iter().map(|&v| 2.0 * v + 3.0 * v * v).collect();
        let fit = poly_regress(&r, &x, 2).unwrap();
        assert!((fit.coeff(1) - 2.0).abs() < 1e-8);
        assert!((fit.coeff(2) - 3.0).abs() < 1e-8);

        let r3: Vec<f64> = x.iter().map(|&v| v * v * v).collect();
        let fit3 = poly_regress(&r3, &x, 3).unwrap();
        assert!(fit3.coeff(1).abs() < 1e-8);
        assert!(fit3.coeff(2).abs() < 1e-8);
        assert!((fit3.coeff(3) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn poly_regress_rejects_rank_deficient_design() {
        let x = vec![0.0; 50];
        let r = vec![1.0; 50];
        assert!(matches!(
            poly_regress(&r, &x, 2),
            Err(Error::SingularDesign { .. })
        ));
    }

    #[test]
    fn poly_regress_with_intercept_centers() {
        let x: Vec<f64> = (1..100).map(|i| i as f64 / 10.0).collect();
        let r: Vec<f64> = x.iter().map(|&v| 5.0 + 0.5 * v).collect();
        let (icept, fit) = poly_regress_with_intercept(&r, &x, 1).unwrap();
        assert!((icept - 5.0).abs() < 1e-8);
        assert!((fit.coeff(1) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn iv_estimate_examples() {
        let r = Residual {
            values: vec![1.0, 0.0],
            source: ResidualSource::Rc,
        };
        assert_eq!(iv_estimate(&r, &[2.0, 0.0], &[4.0, 0.0]).unwrap(), 2.0);

        // y = a m exactly for any valid instrument
        let r = Residual {
            values: vec![0.3, -0.7, 1.1],
            source: ResidualSource::Rr,
        };
        let m = [1.0, 2.0, -1.0];
        let y: Vec<f64> = m.iter().map(|v| 2.5 * v).collect();
        assert!((iv_estimate(&r, &m, &y).unwrap() - 2.5).abs() < 1e-12);

        // orthogonal instrument -> near-pole
        let r = Residual {
            values: vec![1.0, -1.0],
            source: ResidualSource::Rc,
        };
        assert!(matches!(
            iv_estimate(&r, &[1.0, 1.0], &[1.0, 2.0]),
            Err(Error::NearPole { .. })
        ));
    }

    proptest! {
        #[test]
        fn residual_is_orthogonal_to_regressor(
            data in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 2..200)
        ) {
            let x: Vec<f64> = data.iter().map(|(a, _)| *a).collect();
            let y: Vec<f64> = data.iter().map(|(_, b)| *b).collect();
            prop_assume!(dot(&x, &x).unwrap() > 1e-9);
            let r = residual(&y, &x).unwrap();
            let norm_y = dot(&y, &y).unwrap().sqrt();
            let norm_x = dot(&x, &x).unwrap().sqrt();
            let ortho = dot(&r.values, &x).unwrap().abs();
            prop_assert!(ortho <= 1e-9 * (1.0 + norm_y * norm_x));
        }

        #[test]
        fn residual_scales_linearly(
            data in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..50),
            lambda in -5.0f64..5.0,
        ) {
            let x: Vec<f64> = data.iter().map(|(a, _)| *a).collect();
            let y: Vec<f64> = data.iter().map(|(_, b)| *b).collect();
            prop_assume!(dot(&x, &x).unwrap() > 1e-6);
            let base = residual(&y, &x).unwrap();
            let scaled_y: Vec<f64> = y.iter().map(|v| lambda * v).collect();
            let scaled = residual(&scaled_y, &x).unwrap();
            for (s, b) in scaled.values.iter().zip(&base.values) {
                prop_assert!((s - lambda * b).abs() < 1e-9 * (1.0 + b.abs() * lambda.abs()));
            }
        }

        #[test]
        fn iv_estimate_invariant_under_instrument_rescale(
            data in proptest::collection::vec(
                (-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0), 3..50),
            lambda in prop_oneof![-8.0f64..-0.1, 0.1f64..8.0],
        ) {
            let r: Vec<f64> = data.iter().map(|(a, _, _)| *a).collect();
            let m: Vec<f64> = data.iter().map(|(_, b, _)| *b).collect();
            let y: Vec<f64> = data.iter().map(|(_, _, c)| *c).collect();
            let den = dot(&r, &m).unwrap();
            prop_assume!(den.abs() > 1e-3 * r.len() as f64);
            let base = iv_estimate(
                &Residual { values: r.clone(), source: ResidualSource::Rr }, &m, &y).unwrap();
            let scaled: Vec<f64> = r.iter().map(|v| lambda * v).collect();
            let est = iv_estimate(
                &Residual { values: scaled, source: ResidualSource::Rr }, &m, &y).unwrap();
            prop_assert!((est - base).abs() < 1e-9 * (1.0 + base.abs()));
        }
    }
}
