//! Closed-form bias/variance expressions and Gaussian covariance algebra.
//!
//! The estimator bias and asymptotic-variance formulas below are stated in
//! terms of the structural noise variances and hold as written for a
//! zero-mean confounder. Under the uncentered-product convention a nonzero
//! confounder mean enters every W-moment, and the same expressions then hold
//! with `var_w` replaced by the raw second moment `var_w + mu_w^2`; the
//! Monte-Carlo validation suite exercises both regimes. See
//! [`ModelParams`] for the parameter fields.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// A labelled multivariate Gaussian: mean vector and covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFamily {
    pub labels: Vec<String>,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianFamily {
    /// Build from a row-major covariance buffer, validating shape, symmetry
    /// (to 1e-12 relative) and nonnegative diagonal.
    pub fn from_rows(labels: Vec<&str>, mean: Vec<f64>, cov_rows: Vec<f64>) -> Result<Self> {
        let k = labels.len();
        if mean.len() != k || cov_rows.len() != k * k {
            return Err(Error::InvalidParameter(
                "gaussian family shape mismatch".into(),
            ));
        }
        let cov = DMatrix::from_row_slice(k, k, &cov_rows);
        let fam = GaussianFamily {
            labels: labels.into_iter().map(String::from).collect(),
            mean: DVector::from_vec(mean),
            cov,
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.labels.len();
        if self.mean.len() != k || self.cov.nrows() != k || self.cov.ncols() != k {
            return Err(Error::InvalidParameter(
                "gaussian family shape mismatch".into(),
            ));
        }
        let scale = self.cov.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        for i in 0..k {
            if self.cov[(i, i)] < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "negative variance at index {i}"
                )));
            }
            for j in (i + 1)..k {
                if (self.cov[(i, j)] - self.cov[(j, i)]).abs() > 1e-12 * scale.max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "covariance not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }
}

/// Condition a Gaussian family on observed values of a subset of variables.
///
/// For the partition (a = keep, b = given) the conditional law is
/// `mean_a + S_ab^T S_b^{-1} (x_b - mean_b)` with covariance
/// `S_a - S_ab^T S_b^{-1} S_ab`, the Schur complement of the conditioning
/// block.
pub fn condition_gaussian(
    fam: &GaussianFamily,
    keep: &[usize],
    given: &[usize],
    values: &[f64],
) -> Result<GaussianFamily> {
    fam.validate()?;
    let k = fam.dim();
    if values.len() != given.len() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: given.len(),
        });
    }
    for &i in keep.iter().chain(given) {
        if i >= k {
            return Err(Error::InvalidParameter(format!("index {i} out of range")));
        }
    }
    if keep.iter().any(|i| given.contains(i)) {
        return Err(Error::InvalidParameter(
            "keep and given sets overlap".into(),
        ));
    }
    if keep.is_empty() || given.is_empty() {
        return Err(Error::InvalidParameter(
            "keep and given sets must be nonempty".into(),
        ));
    }

    let sigma_a = DMatrix::from_fn(keep.len(), keep.len(), |i, j| fam.cov[(keep[i], keep[j])]);
    let sigma_b = DMatrix::from_fn(given.len(), given.len(), |i, j| {
        fam.cov[(given[i], given[j])]
    });
    // S_ab rows follow the conditioning block, columns the kept block
    let sigma_ab = DMatrix::from_fn(given.len(), keep.len(), |i, j| fam.cov[(given[i], keep[j])]);
    let sigma_b_inv = sigma_b.try_inverse().ok_or(Error::SingularConditioning)?;

    let delta = DVector::from_fn(given.len(), |i, _| values[i] - fam.mean[given[i]]);
    let mean_a = DVector::from_fn(keep.len(), |i, _| fam.mean[keep[i]]);
    let cond_mean = mean_a + sigma_ab.transpose() * &sigma_b_inv * delta;
    let cond_cov = sigma_a - sigma_ab.transpose() * sigma_b_inv * &sigma_ab;
    // symmetrize away factorization round-off
    let cond_cov = 0.5 * (&cond_cov + cond_cov.transpose());

    Ok(GaussianFamily {
        labels: keep.iter().map(|&i| fam.labels[i].clone()).collect(),
        mean: cond_mean,
        cov: cond_cov,
    })
}

/// Higher-order zero-mean Gaussian moment `E[x_{i1} x_{i2} ...]` as the sum
/// over perfect pairings of covariance products. Odd orders vanish.
pub fn isserlis_moment(cov: &DMatrix<f64>, indices: &[usize]) -> f64 {
    if indices.len() % 2 == 1 {
        return 0.0;
    }
    if indices.is_empty() {
        return 1.0;
    }
    fn pairings(cov: &DMatrix<f64>, rest: &[usize]) -> f64 {
        if rest.is_empty() {
            return 1.0;
        }
        let first = rest[0];
        let mut total = 0.0;
        for j in 1..rest.len() {
            let mut remaining = Vec::with_capacity(rest.len() - 2);
            remaining.extend_from_slice(&rest[1..j]);
            remaining.extend_from_slice(&rest[j + 1..]);
            total += cov[(first, rest[j])] * pairings(cov, &remaining);
        }
        total
    }
    pairings(cov, indices)
}

/// OLS slope bias on c: `d eps var_w / (d^2 var_w + var_x)`.
pub fn bias_ols_c(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    let den = p.d * p.d * p.var_w + p.var_x;
    if den == 0.0 {
        return Err(Error::DegenerateDenominator {
            context: "bias_ols_c",
        });
    }
    Ok(p.d * p.eps * p.var_w / den)
}

/// Instrumental front-door bias on a under mediator confounding:
/// `b eps var_w var_x / (eps^2 var_w var_x + var_m (var_x + d^2 var_w))`.
///
/// Reduces to `b eps / (1 + d^2 + eps^2)` at equal unit variances.
pub fn bias_ifdc(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    let den = p.eps * p.eps * p.var_w * p.var_x + p.var_m * (p.var_x + p.d * p.d * p.var_w);
    if den == 0.0 {
        return Err(Error::DegenerateDenominator {
            context: "bias_ifdc",
        });
    }
    Ok(p.b * p.eps * p.var_w * p.var_x / den)
}

/// Expected numerator and denominator of the ratio-improved estimator:
/// `(a (var_m - c eps var_x / d), var_m - c eps var_x / d)`.
///
/// Their ratio is exactly `a` wherever the shared factor is nonzero; the
/// factor vanishes at the estimator's pole.
pub fn improved_expectations(p: &ModelParams, c: f64) -> Result<(f64, f64)> {
    p.validate()?;
    if p.d == 0.0 {
        return Err(Error::DegenerateDenominator {
            context: "improved_expectations",
        });
    }
    let den = p.var_m - c * p.eps * p.var_x / p.d;
    if den == 0.0 {
        return Err(Error::Pole(format!(
            "eps/d = var_m/(c var_x) = {}: improved-estimator expectations vanish",
            p.eps / p.d
        )));
    }
    Ok((p.a * den, den))
}

/// Pole of the improved estimator in eps/d under homoscedastic noise:
/// `1 / (c (g^2 + 1))`; g = 0 recovers the no-instrument pole 1/c.
pub fn pole_location(c: f64, g: f64) -> Result<f64> {
    if c == 0.0 {
        return Err(Error::DegenerateDenominator {
            context: "pole_location",
        });
    }
    Ok(1.0 / (c * (g * g + 1.0)))
}

/// Asymptotic variance of the front-door estimator (unconfounded mediator):
/// `(b^2 var_w var_x + var_y (d^2 var_w + var_x)) / ((d^2 var_w + var_x) var_m)`.
pub fn var_fdc(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    let dx = p.d * p.d * p.var_w + p.var_x;
    if dx == 0.0 || p.var_m == 0.0 {
        return Err(Error::DegenerateDenominator { context: "var_fdc" });
    }
    Ok((p.b * p.b * p.var_w * p.var_x + p.var_y * dx) / (dx * p.var_m))
}

/// Asymptotic variance of the OLS estimate of c: `var_m / (d^2 var_w + var_x)`.
pub fn var_c(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    let dx = p.d * p.d * p.var_w + p.var_x;
    if dx == 0.0 {
        return Err(Error::DegenerateDenominator { context: "var_c" });
    }
    Ok(p.var_m / dx)
}

/// Delta-method variance of the total effect `a c`:
/// `c^2 V(a_fdc) + a^2 V(c)`.
pub fn var_total(p: &ModelParams) -> Result<f64> {
    Ok(p.c * p.c * var_fdc(p)? + p.a * p.a * var_c(p)?)
}

/// Approximate asymptotic variance of the ratio-improved estimator:
/// `V(a_fdc) * (1 + (eps/d)^2 var_x/var_m) / (1 - (c eps/d) var_x/var_m)^2`.
///
/// Valid in the regime where the eps/d ratio is supplied with negligible
/// sampling noise and `d^2 var_w` is small against `var_x`; unbounded at the
/// pole.
pub fn var_improved(p: &ModelParams, c: f64) -> Result<f64> {
    p.validate()?;
    if p.d == 0.0 || p.var_m == 0.0 {
        return Err(Error::DegenerateDenominator {
            context: "var_improved",
        });
    }
    let ratio = p.eps / p.d;
    let vx_over_vm = p.var_x / p.var_m;
    let den = 1.0 - c * ratio * vx_over_vm;
    if den == 0.0 {
        return Err(Error::Pole(
            "improved-estimator variance unbounded at the pole".into(),
        ));
    }
    Ok(var_fdc(p)? * (1.0 + ratio * ratio * vx_over_vm) / (den * den))
}

/// Bias of the discarded prior-instrument residual route (regressing M on V):
/// `b c d var_w / (var_m + c d (c d + eps) var_w + c (c d - eps) var_x / d)`.
///
/// Nonzero for generic parameters, which is why that construction is not
/// used as an estimator.
pub fn bias_rv_naive(p: &ModelParams, c: f64) -> Result<f64> {
    p.validate()?;
    if p.d == 0.0 {
        return Err(Error::DegenerateDenominator {
            context: "bias_rv_naive",
        });
    }
    let den =
        p.var_m + c * p.d * (c * p.d + p.eps) * p.var_w + c * (c * p.d - p.eps) * p.var_x / p.d;
    if den == 0.0 {
        return Err(Error::DegenerateDenominator {
            context: "bias_rv_naive",
        });
    }
    Ok(p.b * c * p.d * p.var_w / den)
}

/// Improved-estimator bias with a cubic treatment coupling
/// `d(W) = W + d2 W^2 + d3 W^3` (unit couplings and variances otherwise):
///
/// `6 (2 d2^2 - d3)(1 + 3 d3) / (1 + 72 d2^4 - 30 d3 - 108 d3^2 - 180 d3^3
///   + 18 d2^2 (3 + 10 d3 + 20 d3^2))`.
pub fn bias_cubic_d(d2: f64, d3: f64) -> Result<f64> {
    let num = 6.0 * (2.0 * d2 * d2 - d3) * (1.0 + 3.0 * d3);
    let den = 1.0 + 72.0 * d2.powi(4) - 30.0 * d3 - 108.0 * d3 * d3 - 180.0 * d3.powi(3)
        + 18.0 * d2 * d2 * (3.0 + 10.0 * d3 + 20.0 * d3 * d3);
    if den == 0.0 {
        return Err(Error::DegenerateDenominator {
            context: "bias_cubic_d",
        });
    }
    Ok(num / den)
}

/// Improved-estimator bias with a cubic mediator coupling
/// `eps(W) = W + e2 W^2 + e3 W^3` (unit couplings and variances otherwise):
/// `3 e3 / (e2^2 + 12 e3 + 9 e3^2)`.
pub fn bias_cubic_eps(e2: f64, e3: f64) -> Result<f64> {
    let den = e2 * e2 + 12.0 * e3 + 9.0 * e3 * e3;
    if den == 0.0 {
        // the e3 -> 0 limit is an honest zero, not a pole
        if e3 == 0.0 && e2 == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::DegenerateDenominator {
            context: "bias_cubic_eps",
        });
    }
    Ok(3.0 * e3 / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{population_covariance, sample_linear_cmm};
    use proptest::prelude::*;

    fn unit() -> ModelParams {
        ModelParams::unit()
    }

    #[test]
    fn bias_ols_c_values() {
        assert_eq!(
            bias_ols_c(&ModelParams { eps: 0.0, ..unit() }).unwrap(),
            0.0
        );
        assert_eq!(bias_ols_c(&unit()).unwrap(), 0.5);
        // var_x >> var_w kills the bias
        let p = ModelParams {
            var_x: 100.0,
            var_w: 0.01,
            ..unit()
        };
        assert!(bias_ols_c(&p).unwrap() < 0.01);
    }

    #[test]
    fn bias_ols_c_monte_carlo() {
        // zero-mean confounder regime where the formula is exact
        let p = ModelParams {
            mu_w: 0.0,
            ..unit()
        };
        let runs = 50;
        let n = 100_000;
        let mut biases = Vec::with_capacity(runs);
        for r in 0..runs {
            let ds = sample_linear_cmm(&p, n, 1000 + r as u64).unwrap();
            biases.push(crate::regress::ols_slope(&ds.m, &ds.x).unwrap() - p.c);
        }
        let mean = biases.iter().sum::<f64>() / runs as f64;
        let var = biases.iter().map(|b| (b - mean) * (b - mean)).sum::<f64>() / (runs - 1) as f64;
        let se = (var / runs as f64).sqrt();
        let expected = bias_ols_c(&p).unwrap();
        assert!(
            (mean - expected).abs() < 3.0 * se + 1e-4,
            "mean {mean} vs {expected} (se {se})"
        );
    }

    #[test]
    fn bias_ifdc_values() {
        // homoscedastic unit: b eps / (1 + d^2 + eps^2) = 1/3
        assert!((bias_ifdc(&unit()).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        // vanishes at large eps
        let p = ModelParams { eps: 1e6, ..unit() };
        assert!(bias_ifdc(&p).unwrap() < 1e-5);
        // eps = 2 evaluates to 2/6 = 1/3 as well
        let p2 = ModelParams { eps: 2.0, ..unit() };
        assert!((bias_ifdc(&p2).unwrap() - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn bias_ifdc_maximum_over_eps() {
        // calculus on b eps/(1 + d^2 + eps^2): max b/(2 sqrt(1+d^2)) at
        // eps = sqrt(1+d^2)
        let mut best = (0.0f64, 0.0f64);
        for i in 0..4000 {
            let eps = i as f64 * 0.001;
            let v = bias_ifdc(&ModelParams { eps, ..unit() }).unwrap();
            if v > best.1 {
                best = (eps, v);
            }
        }
        assert!((best.0 - 2.0f64.sqrt()).abs() < 0.005, "argmax {}", best.0);
        assert!(
            (best.1 - 1.0 / (2.0 * 2.0f64.sqrt())).abs() < 1e-5,
            "max {}",
            best.1
        );
    }

    #[test]
    fn improved_expectations_ratio_is_a() {
        let p = ModelParams {
            eps: 0.0,
            a: 2.5,
            ..unit()
        };
        let (num, den) = improved_expectations(&p, p.c).unwrap();
        assert_eq!((num, den), (2.5 * p.var_m, p.var_m));

        let p = ModelParams {
            eps: 0.5,
            a: 3.0,
            ..unit()
        };
        let (num, den) = improved_expectations(&p, p.c).unwrap();
        assert!((num / den - 3.0).abs() < 1e-15);
        assert!((den - 0.5).abs() < 1e-15);

        // pole: unit params, eps = 1, c = 1
        assert!(matches!(
            improved_expectations(&unit(), 1.0),
            Err(Error::Pole(_))
        ));
    }

    #[test]
    fn pole_location_values() {
        assert_eq!(pole_location(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(pole_location(1.0, 1.0).unwrap(), 0.5);
        assert_eq!(pole_location(2.0, 0.0).unwrap(), 0.5);
        assert!(pole_location(0.0, 1.0).is_err());
    }

    #[test]
    fn variance_formula_values() {
        let p = unit();
        assert!((var_fdc(&p).unwrap() - 1.5).abs() < 1e-15);
        assert!((var_c(&p).unwrap() - 0.5).abs() < 1e-15);
        assert!((var_total(&p).unwrap() - 2.0).abs() < 1e-15);
        // no outcome noise and b = 0 -> zero variance
        let quiet = ModelParams {
            b: 0.0,
            var_y: 0.0,
            ..p
        };
        assert_eq!(var_fdc(&quiet).unwrap(), 0.0);
        // var_x -> 0 with d = 1 pushes V(c) toward var_m / var_w
        let tight = ModelParams { var_x: 1e-12, ..p };
        assert!((var_c(&tight).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn var_improved_limits() {
        let p = ModelParams { eps: 0.0, ..unit() };
        assert!((var_improved(&p, p.c).unwrap() - var_fdc(&p).unwrap()).abs() < 1e-15);

        let tiny_x = ModelParams {
            eps: 0.7,
            var_x: 1e-12,
            ..unit()
        };
        let ratio = var_improved(&tiny_x, tiny_x.c).unwrap() / var_fdc(&tiny_x).unwrap();
        assert!((ratio - 1.0).abs() < 1e-9);

        // eps -> infinity: var_improved -> var_fdc * var_m / (c^2 var_x)
        let big = ModelParams { eps: 1e8, ..unit() };
        let lim = var_improved(&big, big.c).unwrap()
            / (var_fdc(&big).unwrap() * big.var_m / (big.c * big.c * big.var_x));
        assert!((lim - 1.0).abs() < 1e-6);

        assert!(matches!(var_improved(&unit(), 1.0), Err(Error::Pole(_))));
    }

    #[test]
    fn var_improved_ratio_properties() {
        for i in 0..50 {
            let eps = i as f64 * 0.1;
            let p = ModelParams { eps, ..unit() };
            if (eps - 1.0).abs() < 1e-12 {
                continue;
            }
            let ratio = var_improved(&p, p.c).unwrap() / var_fdc(&p).unwrap();
            assert!(ratio >= 0.0);
            if eps == 0.0 {
                assert!((ratio - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bias_rv_naive_values() {
        let p = ModelParams { b: 0.0, ..unit() };
        assert_eq!(bias_rv_naive(&p, p.c).unwrap(), 0.0);
        // all-unit params, eps = 1: 1/(1 + 2 + 0) = 1/3
        assert!((bias_rv_naive(&unit(), 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        // generic parameters give a nonzero value
        let q = ModelParams { eps: 0.3, ..unit() };
        assert!(bias_rv_naive(&q, q.c).unwrap().abs() > 0.01);
    }

    #[test]
    fn cubic_bias_values() {
        assert_eq!(bias_cubic_d(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(bias_cubic_eps(0.7, 0.0).unwrap(), 0.0);
        assert!((bias_cubic_d(0.3, 0.1).unwrap() - 0.1512).abs() < 5e-5);
        assert!((bias_cubic_eps(1.0, 0.1).unwrap() - 0.3 / 2.29).abs() < 1e-12);
    }

    #[test]
    fn conditioning_bivariate_matches_closed_form() {
        let rho: f64 = 0.5;
        let fam =
            GaussianFamily::from_rows(vec!["X", "Y"], vec![0.0, 0.0], vec![1.0, rho, rho, 1.0])
                .unwrap();
        let cond = condition_gaussian(&fam, &[0], &[1], &[2.0]).unwrap();
        assert!((cond.mean[0] - 1.0).abs() < 1e-15); // rho * (sx/sy) * y
        assert!((cond.cov[(0, 0)] - 0.75).abs() < 1e-15); // sx^2 (1 - rho^2)

        // perfectly correlated -> conditional variance vanishes
        let tight =
            GaussianFamily::from_rows(vec!["X", "Y"], vec![0.0, 0.0], vec![1.0, 1.0, 1.0, 1.0])
                .unwrap();
        let cond = condition_gaussian(&tight, &[0], &[1], &[0.3]).unwrap();
        assert!(cond.cov[(0, 0)].abs() < 1e-12);
    }

    #[test]
    fn conditioning_independent_blocks_is_marginal() {
        let fam = GaussianFamily::from_rows(
            vec!["A", "B", "C"],
            vec![1.0, 2.0, 3.0],
            vec![2.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 4.0],
        )
        .unwrap();
        let cond = condition_gaussian(&fam, &[0, 1], &[2], &[10.0]).unwrap();
        assert_eq!(cond.mean[0], 1.0);
        assert_eq!(cond.mean[1], 2.0);
        assert_eq!(cond.cov[(0, 0)], 2.0);
        assert_eq!(cond.cov[(0, 1)], 0.5);
    }

    #[test]
    fn conditioning_on_model_covariance() {
        // conditioning the model family on (X, M) leaves a valid family
        let fam = population_covariance(&unit()).unwrap();
        let cond = condition_gaussian(&fam, &[0, 3], &[1, 2], &[1.0, 2.0]).unwrap();
        assert_eq!(cond.labels, vec!["W", "Y"]);
        assert!(cond.cov[(0, 0)] >= 0.0 && cond.cov[(1, 1)] >= 0.0);
    }

    #[test]
    fn conditioning_rejects_singular_block() {
        let fam =
            GaussianFamily::from_rows(vec!["A", "B"], vec![0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0])
                .unwrap();
        assert!(matches!(
            condition_gaussian(&fam, &[0], &[1], &[1.0]),
            Err(Error::SingularConditioning)
        ));
    }

    #[test]
    fn isserlis_examples() {
        let s2 = 1.7;
        let cov = DMatrix::from_row_slice(1, 1, &[s2]);
        assert!((isserlis_moment(&cov, &[0, 0, 0, 0]) - 3.0 * s2 * s2).abs() < 1e-12);
        assert_eq!(isserlis_moment(&cov, &[0, 0, 0]), 0.0);

        let rho = 0.6;
        let cov2 = DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
        assert!((isserlis_moment(&cov2, &[0, 0, 1, 1]) - (1.0 + 2.0 * rho * rho)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn conditional_covariance_stays_psd(
            rho1 in -0.9f64..0.9,
            rho2 in -0.9f64..0.9,
            given_value in -3.0f64..3.0,
        ) {
            // build a valid 3x3 correlation-like matrix via a random factor
            let l = DMatrix::from_row_slice(3, 3, &[
                1.0, 0.0, 0.0,
                rho1, (1.0 - rho1 * rho1).sqrt(), 0.0,
                rho2, 0.3, (1.0 - rho2 * rho2 - 0.09).max(1e-6).sqrt(),
            ]);
            let cov = &l * l.transpose();
            let fam = GaussianFamily {
                labels: vec!["A".into(), "B".into(), "C".into()],
                mean: DVector::zeros(3),
                cov: 0.5 * (&cov + cov.transpose()),
            };
            let cond = condition_gaussian(&fam, &[0, 1], &[2], &[given_value]).unwrap();
            // PSD check via eigenvalues of the symmetric 2x2
            let eig = cond.cov.clone().symmetric_eigen();
            for ev in eig.eigenvalues.iter() {
                prop_assert!(*ev > -1e-10, "eigenvalue {ev}");
            }
        }

        #[test]
        fn isserlis_odd_orders_vanish(
            rho in -0.9f64..0.9,
            idx in proptest::collection::vec(0usize..2, 1..8),
        ) {
            prop_assume!(idx.len() % 2 == 1);
            let cov = DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
            prop_assert_eq!(isserlis_moment(&cov, &idx), 0.0);
        }
    }
}
