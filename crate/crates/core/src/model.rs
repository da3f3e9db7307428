//! The confounded-mediator model family and samplers.
//!
//! Structural equations of the linear model, one sample per row:
//!
//! ```text
//! W = u_W                u_W ~ N(mu_w, var_w)
//! X = d W + g V + u_X    u_X ~ N(0, var_x),  V ~ N(0, var_v) present iff g != 0
//! M = c X + eps W + u_M  u_M ~ N(0, var_m)
//! Y = a M + b W + u_Y    u_Y ~ N(0, var_y)
//! ```
//!
//! The partially linear variant replaces `d W` and `eps W` with polynomial
//! couplings `d(W)` and `eps(W)` (plain monomial coefficients, no constant
//! term).
//!
//! Each node draws its noise from its own counter-based RNG stream derived
//! from the seed, so regeneration of a subset of nodes (e.g. fresh M and Y
//! over fixed W and X) is expressible and every draw is reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::analytic::GaussianFamily;
use crate::error::{Error, Result};
use crate::series;

/// Structural coefficients and noise moments of the confounded-mediator model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Effect M -> Y (the estimation target).
    pub a: f64,
    /// Effect W -> Y.
    pub b: f64,
    /// Effect X -> M.
    pub c: f64,
    /// Effect W -> X.
    pub d: f64,
    /// Effect W -> M (mediator confounding strength).
    pub eps: f64,
    /// Effect V -> X; zero means no prior instrument and no V column.
    pub g: f64,
    /// Mean of the confounder noise u_W. The ratio estimator requires this
    /// to be nonzero; that is enforced at its call site, not here.
    pub mu_w: f64,
    pub var_w: f64,
    pub var_x: f64,
    pub var_m: f64,
    pub var_y: f64,
    pub var_v: f64,
}

impl ModelParams {
    /// All couplings 1, all noise variances 1, mu_w = 1, no prior instrument.
    pub fn unit() -> Self {
        ModelParams {
            a: 1.0,
            b: 1.0,
            c: 1.0,
            d: 1.0,
            eps: 1.0,
            g: 0.0,
            mu_w: 1.0,
            var_w: 1.0,
            var_x: 1.0,
            var_m: 1.0,
            var_y: 1.0,
            var_v: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("eps", self.eps),
            ("g", self.g),
            ("mu_w", self.mu_w),
            ("var_w", self.var_w),
            ("var_x", self.var_x),
            ("var_m", self.var_m),
            ("var_y", self.var_y),
            ("var_v", self.var_v),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v}")));
            }
        }
        for (name, v) in [
            ("var_w", self.var_w),
            ("var_x", self.var_x),
            ("var_m", self.var_m),
            ("var_y", self.var_y),
            ("var_v", self.var_v),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} = {v} < 0")));
            }
        }
        Ok(())
    }

    pub fn has_prior_instrument(&self) -> bool {
        self.g != 0.0
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::unit()
    }
}

/// Ordered coefficients `c1..cn` of `p(w) = sum_k c_k w^k`.
///
/// Plain monomial convention, no constant term and no factorial
/// normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoeffs {
    coeffs: Vec<f64>,
}

impl PolyCoeffs {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("empty polynomial".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite polynomial coefficient".into(),
            ));
        }
        Ok(PolyCoeffs { coeffs })
    }

    pub fn linear(c1: f64) -> Self {
        PolyCoeffs { coeffs: vec![c1] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of w^k (1-based); zero beyond the stored degree.
    pub fn coeff(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.coeffs.get(k - 1).copied().unwrap_or(0.0)
        }
    }

    /// Evaluate `sum_k c_k w^k` by Horner's rule.
    pub fn eval(&self, w: f64) -> f64 {
        let mut acc = 0.0;
        for &ck in self.coeffs.iter().rev() {
            acc = acc * w + ck;
        }
        acc * w
    }

    /// Evaluate the derivative `sum_k k c_k w^(k-1)`.
    pub fn eval_derivative(&self, w: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &ck) in self.coeffs.iter().enumerate().rev() {
            acc = acc * w + (k + 1) as f64 * ck;
        }
        acc
    }

    /// Invertibility of the coupling on the support of W.
    ///
    /// Degree <= 3 uses the closed-form cubic condition (global); higher
    /// degrees fall back to a sign check of the derivative on a 6-sigma
    /// grid around mu_w. A zero-variance W has point support, on which any
    /// coupling is trivially invertible.
    pub fn check_invertible(&self, mu_w: f64, var_w: f64) -> Result<()> {
        if var_w == 0.0 {
            return Ok(());
        }
        if self.degree() <= 3 {
            let witness =
                series::check_invertible_cubic(self.coeff(1), self.coeff(2), self.coeff(3));
            if witness.invertible {
                Ok(())
            } else {
                Err(Error::NonInvertible(witness.witness))
            }
        } else {
            let sd = var_w.sqrt();
            let lo = mu_w - 6.0 * sd;
            let hi = mu_w + 6.0 * sd;
            let steps = 1000;
            let mut pos = 0usize;
            let mut neg = 0usize;
            for i in 0..=steps {
                let w = lo + (hi - lo) * i as f64 / steps as f64;
                let dp = self.eval_derivative(w);
                if dp > 0.0 {
                    pos += 1;
                } else if dp < 0.0 {
                    neg += 1;
                }
            }
            if pos > 0 && neg > 0 {
                return Err(Error::NonInvertible(format!(
                    "derivative changes sign on [{lo:.3}, {hi:.3}]"
                )));
            }
            if pos == 0 && neg == 0 {
                return Err(Error::NonInvertible(
                    "derivative vanishes on the support".into(),
                ));
            }
            Ok(())
        }
    }
}

/// Column-major sample table for the model nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub n: usize,
    /// Prior-instrument column, present iff the model has g != 0.
    pub v: Option<Vec<f64>>,
    pub w: Vec<f64>,
    pub x: Vec<f64>,
    pub m: Vec<f64>,
    pub y: Vec<f64>,
    /// Retained treatment noise (debug mode only).
    pub u_x: Option<Vec<f64>>,
    /// Retained mediator noise (debug mode only).
    pub u_m: Option<Vec<f64>>,
}

impl Dataset {
    /// Render as CSV with a header row; column order (v,)w,x,m,y(,u_x,u_m).
    pub fn to_csv(&self) -> String {
        let mut header: Vec<&str> = Vec::new();
        if self.v.is_some() {
            header.push("v");
        }
        header.extend(["w", "x", "m", "y"]);
        if self.u_x.is_some() {
            header.push("u_x");
        }
        if self.u_m.is_some() {
            header.push("u_m");
        }
        let mut out = header.join(",");
        out.push('\n');
        for i in 0..self.n {
            let mut fields: Vec<String> = Vec::new();
            if let Some(v) = &self.v {
                fields.push(v[i].to_string());
            }
            fields.push(self.w[i].to_string());
            fields.push(self.x[i].to_string());
            fields.push(self.m[i].to_string());
            fields.push(self.y[i].to_string());
            if let Some(ux) = &self.u_x {
                fields.push(ux[i].to_string());
            }
            if let Some(um) = &self.u_m {
                fields.push(um[i].to_string());
            }
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

/// RNG stream ids, one per node.
pub(crate) mod stream {
    pub const W: u64 = 0;
    pub const V: u64 = 1;
    pub const X: u64 = 2;
    pub const M: u64 = 3;
    pub const Y: u64 = 4;
}

/// Draw `n` values from `N(mean, var)` on the given node stream.
///
/// The standard-normal variate is always drawn and then scaled, so the
/// stream advances identically whatever the variance (including zero).
pub(crate) fn draw_column(seed: u64, stream_id: u64, n: usize, mean: f64, var: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    let sd = var.sqrt();
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            mean + sd * z
        })
        .collect()
}

fn check_sample_args(params: &ModelParams, n: usize) -> Result<()> {
    params.validate()?;
    if n < 2 {
        return Err(Error::SampleSize { n, min: 2 });
    }
    Ok(())
}

/// Sample the linear confounded-mediator model.
///
/// Identical `(params, n, seed)` yield a bit-identical dataset.
pub fn sample_linear_cmm(params: &ModelParams, n: usize, seed: u64) -> Result<Dataset> {
    sample_linear_cmm_opts(params, n, seed, false)
}

/// As [`sample_linear_cmm`], optionally retaining the u_X and u_M noise
/// columns for debugging.
pub fn sample_linear_cmm_opts(
    params: &ModelParams,
    n: usize,
    seed: u64,
    retain_noise: bool,
) -> Result<Dataset> {
    check_sample_args(params, n)?;
    let w = draw_column(seed, stream::W, n, params.mu_w, params.var_w);
    let v = params
        .has_prior_instrument()
        .then(|| draw_column(seed, stream::V, n, 0.0, params.var_v));
    let u_x = draw_column(seed, stream::X, n, 0.0, params.var_x);
    let u_m = draw_column(seed, stream::M, n, 0.0, params.var_m);
    let u_y = draw_column(seed, stream::Y, n, 0.0, params.var_y);

    let mut x = Vec::with_capacity(n);
    let mut m = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let xi = params.d * w[i] + v.as_ref().map_or(0.0, |v| params.g * v[i]) + u_x[i];
        let mi = params.c * xi + params.eps * w[i] + u_m[i];
        let yi = params.a * mi + params.b * w[i] + u_y[i];
        x.push(xi);
        m.push(mi);
        y.push(yi);
    }
    Ok(Dataset {
        n,
        v,
        w,
        x,
        m,
        y,
        u_x: retain_noise.then_some(u_x),
        u_m: retain_noise.then_some(u_m),
    })
}

/// Sample the partially linear model with polynomial couplings `d(W)` and
/// `eps(W)`.
///
/// `d_poly` must be invertible on the support of W (closed-form cubic
/// condition for degree <= 3, derivative grid check otherwise). The prior
/// instrument is not part of this variant; `g` must be zero.
pub fn sample_partial_cmm(
    params: &ModelParams,
    d_poly: &PolyCoeffs,
    eps_poly: &PolyCoeffs,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    sample_partial_cmm_opts(params, d_poly, eps_poly, n, seed, false)
}

/// As [`sample_partial_cmm`] with optional noise retention.
pub fn sample_partial_cmm_opts(
    params: &ModelParams,
    d_poly: &PolyCoeffs,
    eps_poly: &PolyCoeffs,
    n: usize,
    seed: u64,
    retain_noise: bool,
) -> Result<Dataset> {
    check_sample_args(params, n)?;
    if params.has_prior_instrument() {
        return Err(Error::InvalidParameter(
            "prior instrument (g != 0) is not supported in the partial linear model".into(),
        ));
    }
    d_poly.check_invertible(params.mu_w, params.var_w)?;

    let w = draw_column(seed, stream::W, n, params.mu_w, params.var_w);
    let u_x = draw_column(seed, stream::X, n, 0.0, params.var_x);
    let u_m = draw_column(seed, stream::M, n, 0.0, params.var_m);
    let u_y = draw_column(seed, stream::Y, n, 0.0, params.var_y);

    let mut x = Vec::with_capacity(n);
    let mut m = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let xi = d_poly.eval(w[i]) + u_x[i];
        let mi = params.c * xi + eps_poly.eval(w[i]) + u_m[i];
        let yi = params.a * mi + params.b * w[i] + u_y[i];
        x.push(xi);
        m.push(mi);
        y.push(yi);
    }
    Ok(Dataset {
        n,
        v: None,
        w,
        x,
        m,
        y,
        u_x: retain_noise.then_some(u_x),
        u_m: retain_noise.then_some(u_m),
    })
}

/// Exact population mean vector and centered covariance matrix of the
/// linear model nodes, ordered (V,)W,X,M,Y.
///
/// Derived by expanding the structural equations; used as the validation
/// oracle for the samplers.
pub fn population_covariance(params: &ModelParams) -> Result<GaussianFamily> {
    params.validate()?;
    let p = params;
    let s = p.c * p.d + p.eps; // total W -> M path weight
    let var_x = p.d * p.d * p.var_w + p.g * p.g * p.var_v + p.var_x;
    let cov_xm = p.c * var_x + p.eps * p.d * p.var_w;
    let cov_wm = s * p.var_w;
    let var_m =
        p.c * p.c * var_x + 2.0 * p.c * p.eps * p.d * p.var_w + p.eps * p.eps * p.var_w + p.var_m;
    let cov_wy = (p.a * s + p.b) * p.var_w;
    let cov_xy = p.a * cov_xm + p.b * p.d * p.var_w;
    let cov_my = p.a * var_m + p.b * cov_wm;
    let var_y = p.a * p.a * var_m + 2.0 * p.a * p.b * cov_wm + p.b * p.b * p.var_w + p.var_y;

    let mean_w = p.mu_w;
    let mean_x = p.d * p.mu_w;
    let mean_m = s * p.mu_w;
    let mean_y = (p.a * s + p.b) * p.mu_w;

    if p.has_prior_instrument() {
        let labels = vec!["V", "W", "X", "M", "Y"];
        let mean = vec![0.0, mean_w, mean_x, mean_m, mean_y];
        let gv = p.g * p.var_v;
        #[rustfmt::skip]
        let cov = vec![
            p.var_v, 0.0,            gv,             p.c * gv,        p.a * p.c * gv,
            0.0,     p.var_w,        p.d * p.var_w,  cov_wm,          cov_wy,
            gv,      p.d * p.var_w,  var_x,          cov_xm,          cov_xy,
            p.c*gv,  cov_wm,         cov_xm,         var_m,           cov_my,
            p.a*p.c*gv, cov_wy,      cov_xy,         cov_my,          var_y,
        ];
        GaussianFamily::from_rows(labels, mean, cov)
    } else {
        let labels = vec!["W", "X", "M", "Y"];
        let mean = vec![mean_w, mean_x, mean_m, mean_y];
        #[rustfmt::skip]
        let cov = vec![
            p.var_w,       p.d * p.var_w, cov_wm,  cov_wy,
            p.d * p.var_w, var_x,         cov_xm,  cov_xy,
            cov_wm,        cov_xm,        var_m,   cov_my,
            cov_wy,        cov_xy,        cov_my,  var_y,
        ];
        GaussianFamily::from_rows(labels, mean, cov)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noiseless_unit() -> ModelParams {
        ModelParams {
            var_w: 0.0,
            var_x: 0.0,
            var_m: 0.0,
            var_y: 0.0,
            var_v: 0.0,
            ..ModelParams::unit()
        }
    }

    #[test]
    fn noiseless_propagation() {
        let ds = sample_linear_cmm(&noiseless_unit(), 3, 1).unwrap();
        for i in 0..3 {
            assert_eq!(ds.w[i], 1.0);
            assert_eq!(ds.x[i], 1.0);
            assert_eq!(ds.m[i], 2.0);
            assert_eq!(ds.y[i], 3.0);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let p = ModelParams::unit();
        let a = sample_linear_cmm(&p, 100, 42).unwrap();
        let b = sample_linear_cmm(&p, 100, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_linear_cmm(&p, 100, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_args() {
        let p = ModelParams::unit();
        assert!(matches!(
            sample_linear_cmm(&p, 1, 0),
            Err(Error::SampleSize { .. })
        ));
        let bad = ModelParams { var_x: -1.0, ..p };
        assert!(sample_linear_cmm(&bad, 10, 0).is_err());
        let nan = ModelParams { d: f64::NAN, ..p };
        assert!(matches!(
            sample_linear_cmm(&nan, 10, 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn sample_mean_of_x_converges() {
        // law of large numbers: mean(X) -> d * mu_w = 1
        let ds = sample_linear_cmm(&ModelParams::unit(), 1_000_000, 7).unwrap();
        let mean_x = ds.x.iter().sum::<f64>() / ds.n as f64;
        assert!((mean_x - 1.0).abs() < 0.01, "mean(X) = {mean_x}");
    }

    #[test]
    fn sample_variance_of_x_matches_population() {
        // Var(X) = d^2 var_w + var_x = 2 for unit params
        let ds = sample_linear_cmm(&ModelParams::unit(), 1_000_000, 11).unwrap();
        let mean = ds.x.iter().sum::<f64>() / ds.n as f64;
        let var = ds.x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (ds.n - 1) as f64;
        assert!((var - 2.0).abs() / 2.0 < 0.02, "Var(X) = {var}");
    }

    #[test]
    fn empirical_covariance_tracks_population() {
        // every (co)variance entry within 5 standard errors at n = 10^6
        let p = ModelParams {
            eps: 0.7,
            g: 0.5,
            b: 1.3,
            ..ModelParams::unit()
        };
        let n = 1_000_000usize;
        let ds = sample_linear_cmm(&p, n, 5).unwrap();
        let fam = population_covariance(&p).unwrap();
        let cols: Vec<&[f64]> = vec![ds.v.as_ref().unwrap(), &ds.w, &ds.x, &ds.m, &ds.y];
        let means: Vec<f64> = cols
            .iter()
            .map(|c| c.iter().sum::<f64>() / n as f64)
            .collect();
        for i in 0..cols.len() {
            for j in i..cols.len() {
                let mut cov = 0.0;
                for (a, b) in cols[i].iter().zip(cols[j]) {
                    cov += (a - means[i]) * (b - means[j]);
                }
                cov /= (n - 1) as f64;
                let expected = fam.cov[(i, j)];
                // SE of a sample covariance of a Gaussian pair
                let se =
                    ((fam.cov[(i, i)] * fam.cov[(j, j)] + expected * expected) / n as f64).sqrt();
                assert!(
                    (cov - expected).abs() < 5.0 * se,
                    "cov[{i},{j}] = {cov}, expected {expected} (se {se})"
                );
            }
        }
    }

    #[test]
    fn population_covariance_decouples() {
        // all couplings zero -> diagonal of noise variances
        let p = ModelParams {
            a: 0.0,
            b: 0.0,
            c: 0.0,
            d: 0.0,
            eps: 0.0,
            ..ModelParams::unit()
        };
        let fam = population_covariance(&p).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(fam.cov[(i, j)], expected);
            }
        }
    }

    #[test]
    fn population_covariance_unit_values() {
        let fam = population_covariance(&ModelParams::unit()).unwrap();
        let idx = |l: &str| fam.labels.iter().position(|x| x == l).unwrap();
        let (w, x, m, y) = (idx("W"), idx("X"), idx("M"), idx("Y"));
        assert_eq!(fam.cov[(x, x)], 2.0);
        assert_eq!(fam.cov[(m, m)], 6.0); // c^2*2 + 2*1 + 1 + 1
        assert_eq!(fam.cov[(w, y)], 3.0); // a(cd+eps)var_w + b var_w
        assert_eq!(fam.mean[y], 3.0);
    }

    #[test]
    fn partial_degree_one_equals_linear() {
        let p = ModelParams {
            eps: 0.5,
            d: 1.5,
            ..ModelParams::unit()
        };
        let lin = sample_linear_cmm(&p, 500, 3).unwrap();
        let par = sample_partial_cmm(
            &p,
            &PolyCoeffs::linear(p.d),
            &PolyCoeffs::linear(p.eps),
            500,
            3,
        )
        .unwrap();
        assert_eq!(lin, par);
    }

    #[test]
    fn partial_noiseless_evaluates_pointwise() {
        let p = ModelParams { ..noiseless_unit() };
        let d_poly = PolyCoeffs::new(vec![1.0, 1.0]).unwrap();
        let eps_poly = PolyCoeffs::linear(1.0);
        let ds = sample_partial_cmm(&p, &d_poly, &eps_poly, 2, 0).unwrap();
        assert_eq!(ds.x[0], 2.0); // d(1) = 1 + 1
        assert_eq!(ds.m[0], p.c * 2.0 + 1.0);
    }

    #[test]
    fn partial_rejects_noninvertible_coupling() {
        let p = ModelParams::unit();
        // quadratic with no cubic term: derivative changes sign
        let d_poly = PolyCoeffs::new(vec![1.0, 1.0]).unwrap();
        let err = sample_partial_cmm(&p, &d_poly, &PolyCoeffs::linear(1.0), 10, 0);
        assert!(matches!(err, Err(Error::NonInvertible(_))));
        // cubic inside the bound passes: |0.5| <= sqrt(3*0.1) = 0.548
        let ok = PolyCoeffs::new(vec![1.0, 0.5, 0.1]).unwrap();
        assert!(sample_partial_cmm(&p, &ok, &PolyCoeffs::linear(1.0), 10, 0).is_ok());
    }

    #[test]
    fn partial_rejects_prior_instrument() {
        let p = ModelParams {
            g: 1.0,
            ..ModelParams::unit()
        };
        let err = sample_partial_cmm(
            &p,
            &PolyCoeffs::linear(1.0),
            &PolyCoeffs::linear(1.0),
            10,
            0,
        );
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn poly_eval_matches_horner_expansion() {
        let p = PolyCoeffs::new(vec![2.0, -1.0, 0.5]).unwrap();
        let w = 1.3;
        let direct = 2.0 * w - w * w + 0.5 * w * w * w;
        assert!((p.eval(w) - direct).abs() < 1e-12);
        let dd = 2.0 - 2.0 * w + 1.5 * w * w;
        assert!((p.eval_derivative(w) - dd).abs() < 1e-12);
    }
}
