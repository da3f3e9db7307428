//! Formal power series with no constant term.
//!
//! Supports truncated composition, iterative inversion (the coefficients of
//! the inverse function up to order m follow from the original coefficients
//! up to order m), and the closed-form invertibility condition for cubic
//! couplings.

use crate::error::{Error, Result};
use crate::model::PolyCoeffs;

/// Coefficients `c1..cm` of `sum_k c_k x^k`; there is never a constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    coeffs: Vec<f64>,
}

impl Series {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("empty series".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite series coefficient".into(),
            ));
        }
        Ok(Series { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of x^k, 1-based; zero beyond the truncation order.
    pub fn coeff(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.coeffs.get(k - 1).copied().unwrap_or(0.0)
        }
    }

    /// Evaluate the truncated series at x.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &ck in self.coeffs.iter().rev() {
            acc = acc * x + ck;
        }
        acc * x
    }

    /// The identity series x, truncated to the given order.
    pub fn identity(order: usize) -> Self {
        let mut coeffs = vec![0.0; order.max(1)];
        coeffs[0] = 1.0;
        Series { coeffs }
    }
}

impl From<&PolyCoeffs> for Series {
    fn from(p: &PolyCoeffs) -> Self {
        Series {
            coeffs: p.coeffs().to_vec(),
        }
    }
}

/// Truncated product of two no-constant-term series, through x^m.
fn mul_trunc(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        let deg_a = i + 1;
        if deg_a >= m {
            break;
        }
        for (j, &bj) in b.iter().enumerate() {
            let deg = deg_a + j + 1;
            if deg > m {
                break;
            }
            out[deg - 1] += ai * bj;
        }
    }
    out
}

/// Coefficients of `outer(inner(x))` through x^m.
pub fn compose_series(outer: &Series, inner: &Series, m: usize) -> Series {
    let m = m.max(1);
    let mut out = vec![0.0; m];
    // running power inner^j, truncated
    let mut power: Vec<f64> = inner.coeffs.iter().take(m).copied().collect();
    power.resize(m, 0.0);
    for (j, &oj) in outer.coeffs.iter().enumerate() {
        let j = j + 1;
        if j > m {
            break;
        }
        if j > 1 {
            power = mul_trunc(&power, &inner.coeffs, m);
        }
        if oj != 0.0 {
            for k in 0..m {
                out[k] += oj * power[k];
            }
        }
    }
    Series { coeffs: out }
}

/// Compositional inverse of `d` through x^m: `d(b(x)) = x + O(x^(m+1))`.
///
/// Computed by iterative coefficient matching: the order-k coefficient of
/// `d(b(x))` is `d1 * b_k` plus terms involving only `b_1..b_(k-1)`, so each
/// `b_k` is determined in turn.
pub fn invert_series(d: &Series, m: usize) -> Result<Series> {
    let d1 = d.coeff(1);
    if d1 == 0.0 {
        return Err(Error::NonInvertible("zero linear coefficient".into()));
    }
    let m = m.max(1);
    let mut b = vec![1.0 / d1];
    for k in 2..=m {
        let partial = Series { coeffs: b.clone() };
        let comp = compose_series(d, &partial, k);
        b.push(-comp.coeff(k) / d1);
    }
    Series::new(b)
}

/// Series of the backdoor coupling `eps ∘ d^{-1}` through x^m.
pub fn eps_over_d_series(eps: &Series, d: &Series, m: usize) -> Result<Series> {
    let inv = invert_series(d, m)?;
    Ok(compose_series(eps, &inv, m))
}

/// Outcome of the cubic invertibility test, with a human-readable witness
/// of the decisive inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicInvertibility {
    pub invertible: bool,
    pub witness: String,
}

/// Closed-form invertibility of `d(W) = d1 W + d2 W^2 + d3 W^3` on the whole
/// real line: the derivative keeps one sign iff `d2^2 <= 3 d1 d3`, which
/// requires d1 and d3 to share a sign (or vanish). A pure quadratic term
/// always fails; a vanishing quadratic and cubic reduce to `d1 != 0`.
pub fn check_invertible_cubic(d1: f64, d2: f64, d3: f64) -> CubicInvertibility {
    if d3 == 0.0 && d2 == 0.0 {
        return if d1 != 0.0 {
            CubicInvertibility {
                invertible: true,
                witness: format!("linear with d1 = {d1} != 0"),
            }
        } else {
            CubicInvertibility {
                invertible: false,
                witness: "d1 = 0 with no higher terms".into(),
            }
        };
    }
    if d3 == 0.0 {
        return CubicInvertibility {
            invertible: false,
            witness: format!("quadratic term d2 = {d2} != 0 with d3 = 0: derivative changes sign"),
        };
    }
    if d1 * d3 < 0.0 {
        return CubicInvertibility {
            invertible: false,
            witness: format!("d1 = {d1} and d3 = {d3} have opposite signs"),
        };
    }
    let bound = (3.0 * d1 * d3).sqrt();
    if d2.abs() <= bound {
        CubicInvertibility {
            invertible: true,
            witness: format!("|d2| = {} <= sqrt(3 d1 d3) = {bound}", d2.abs()),
        }
    } else {
        CubicInvertibility {
            invertible: false,
            witness: format!("|d2| = {} > sqrt(3 d1 d3) = {bound}", d2.abs()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Closed-form order-2 coefficient of eps ∘ d^{-1}.
    fn coeff2(d: &[f64; 3], e: &[f64; 3]) -> f64 {
        (d[0] * e[1] - d[1] * e[0]) / d[0].powi(3)
    }

    /// Closed-form order-3 coefficient of eps ∘ d^{-1}.
    fn coeff3(d: &[f64; 3], e: &[f64; 3]) -> f64 {
        (d[0] * d[0] * e[2] + 2.0 * d[1] * d[1] * e[0]
            - d[0] * d[2] * e[0]
            - 2.0 * d[0] * d[1] * e[1])
            / d[0].powi(5)
    }

    #[test]
    fn invert_linear() {
        let d = Series::new(vec![4.0]).unwrap();
        let inv = invert_series(&d, 1).unwrap();
        assert_eq!(inv.coeffs(), &[0.25]);
    }

    #[test]
    fn invert_quadratic_closed_form() {
        // d = x + a2 x^2 inverts to x - a2 x^2 + 2 a2^2 x^3 + ...
        let a2 = 0.7;
        let d = Series::new(vec![1.0, a2]).unwrap();
        let inv = invert_series(&d, 3).unwrap();
        assert!((inv.coeff(1) - 1.0).abs() < 1e-14);
        assert!((inv.coeff(2) + a2).abs() < 1e-14);
        assert!((inv.coeff(3) - 2.0 * a2 * a2).abs() < 1e-14);
    }

    #[test]
    fn invert_requires_linear_term() {
        let d = Series::new(vec![0.0, 1.0]).unwrap();
        assert!(matches!(invert_series(&d, 3), Err(Error::NonInvertible(_))));
    }

    #[test]
    fn backdoor_series_matches_closed_forms() {
        let d = [1.0, 0.5, 0.1];
        let e = [1.0, 0.0, 0.0];
        let s = eps_over_d_series(
            &Series::new(e.to_vec()).unwrap(),
            &Series::new(d.to_vec()).unwrap(),
            3,
        )
        .unwrap();
        assert!((s.coeff(1) - 1.0).abs() < 1e-14);
        assert!((s.coeff(2) - (-0.5)).abs() < 1e-14);
        assert!((s.coeff(3) - 0.4).abs() < 1e-14); // 2*0.25 - 0.1
        assert!((s.coeff(2) - coeff2(&d, &e)).abs() < 1e-14);
        assert!((s.coeff(3) - coeff3(&d, &e)).abs() < 1e-14);
    }

    #[test]
    fn backdoor_series_numeric_agreement() {
        // truncated eps ∘ d^{-1} vs a pointwise root-finding inverse on a
        // grid. The order-5 truncation is only pointwise-accurate while the
        // coupling stays well inside the convergence region; larger cubic
        // coefficients push the induced x-range past the series radius and
        // the expansion is qualitative only.
        for (d2, d3, e) in [
            (0.01, 0.01, vec![1.0, -0.3, 0.15]),
            (-0.01, 0.01, vec![2.0, 0.5, 0.1]),
            (0.02, 0.005, vec![1.0]),
        ] {
            let d = Series::new(vec![1.0, d2, d3]).unwrap();
            let e = Series::new(e).unwrap();
            let s = eps_over_d_series(&e, &d, 5).unwrap();
            for i in 0..=20 {
                let w = 0.5 + i as f64 / 20.0; // W in [0.5, 1.5]
                let x = d.eval(w);
                // bisection for d^{-1}(x) on a bracketing interval
                let (mut lo, mut hi) = (0.0f64, 3.0f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if d.eval(mid) < x {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let exact = e.eval(0.5 * (lo + hi));
                let approx = s.eval(x);
                assert!(
                    (approx - exact).abs() <= 0.01 * exact.abs().max(0.1),
                    "d2={d2} d3={d3} w={w}: series {approx} vs exact {exact}"
                );
            }
        }
    }

    #[test]
    fn cubic_invertibility_examples() {
        assert!(check_invertible_cubic(1.0, 0.0, 0.5).invertible);
        let fail = check_invertible_cubic(1.0, 1.0, 0.1);
        assert!(!fail.invertible);
        assert!(fail.witness.contains('>'));
        // sqrt(3 * 1 * 0.1) = 0.5477 > 0.5
        assert!(check_invertible_cubic(1.0, 0.5, 0.1).invertible);
        // opposite signs never work
        assert!(!check_invertible_cubic(1.0, 0.0, -0.1).invertible);
        // pure quadratic fails, pure cubic passes
        assert!(!check_invertible_cubic(1.0, 0.3, 0.0).invertible);
        assert!(check_invertible_cubic(0.0, 0.0, 2.0).invertible);
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(
            d1 in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0],
            rest in proptest::collection::vec(-1.0f64..1.0, 0..5),
        ) {
            let mut coeffs = vec![d1];
            coeffs.extend(rest);
            let d = Series::new(coeffs).unwrap();
            let m = 6;
            let inv = invert_series(&d, m).unwrap();
            for (fst, snd) in [(&d, &inv), (&inv, &d)] {
                let comp = compose_series(fst, snd, m);
                let id = Series::identity(m);
                for k in 1..=m {
                    let scale = 1.0 + d.coeff(k).abs().max(inv.coeff(k).abs()).powi(2);
                    prop_assert!(
                        (comp.coeff(k) - id.coeff(k)).abs() < 1e-9 * scale,
                        "order {k}: {} vs {}", comp.coeff(k), id.coeff(k)
                    );
                }
            }
        }

        #[test]
        fn linear_outer_scales_inner(
            e1 in -5.0f64..5.0,
            inner in proptest::collection::vec(-2.0f64..2.0, 1..6),
        ) {
            let outer = Series::new(vec![e1]).unwrap();
            let inner_s = Series::new(inner.clone()).unwrap();
            let comp = compose_series(&outer, &inner_s, inner.len());
            for (k, &ck) in inner.iter().enumerate() {
                prop_assert_eq!(comp.coeff(k + 1), e1 * ck);
            }
        }
    }
}
