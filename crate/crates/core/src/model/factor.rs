//! The off-diagonal factor of the ratio equation.
//!
//! With `n = k - m - r >= 2`,
//! `x (1 + λy)^n - y (1 + λx)^n = (y - x) g(x, y)` where
//! `g(x, y) = Σ_{j=2..n} C(n, j) λ^j x y h_{j-2}(x, y) - 1` and `h_d` is the
//! complete homogeneous symmetric polynomial of degree `d`.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::polyroot::{rational_from_f64, RealPolynomial};

fn check_gap(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "the off-diagonal factor needs n = k - m - r >= 2, got {n}"
        )));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn binom(n: u32, j: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(binomial(n as u64, j as u64)))
}

/// `g(·, y)` as an exact polynomial in `x`.
pub fn g_poly(n: u32, lambda: f64, y: f64) -> Result<RealPolynomial> {
    check_gap(n)?;
    check_positive("activity", lambda)?;
    check_positive("y", y)?;
    let lam = rational_from_f64(lambda)?;
    let y = rational_from_f64(y)?;
    let mut coeffs = vec![BigRational::zero(); n as usize];
    coeffs[0] = -BigRational::one();
    for j in 2..=n {
        let c = binom(n, j) * num_traits::pow(lam.clone(), j as usize);
        // x^{a+1} y^{j-1-a}, a = 0..=j-2
        for a in 0..=(j - 2) {
            let yp = num_traits::pow(y.clone(), (j - 1 - a) as usize);
            coeffs[(a + 1) as usize] += &c * yp;
        }
    }
    Ok(RealPolynomial::new(coeffs))
}

/// The diagonal restriction `g(x, x)`:
/// `Σ_{j=2..n} (j - 1) C(n, j) λ^j x^j - 1`.
pub fn multiplicity_poly(n: u32, lambda: f64) -> Result<RealPolynomial> {
    check_gap(n)?;
    check_positive("activity", lambda)?;
    let lam = rational_from_f64(lambda)?;
    let mut coeffs = vec![BigRational::zero(); n as usize + 1];
    coeffs[0] = -BigRational::one();
    for j in 2..=n {
        coeffs[j as usize] = BigRational::from_integer(BigInt::from(j - 1))
            * binom(n, j)
            * num_traits::pow(lam.clone(), j as usize);
    }
    Ok(RealPolynomial::new(coeffs))
}

fn binom_f64(n: u32, j: u32) -> f64 {
    binomial(n as u64, j as u64) as f64
}

/// `g(x, y)` in floating point.
pub fn g_value(n: u32, lambda: f64, x: f64, y: f64) -> f64 {
    g_partials(n, lambda, x, y).0
}

/// `(g, ∂g/∂x, ∂g/∂y)` at `(x, y)`.
pub fn g_partials(n: u32, lambda: f64, x: f64, y: f64) -> (f64, f64, f64) {
    let mut g = -1.0;
    let mut gx = 0.0;
    let mut gy = 0.0;
    let mut lam_j = lambda;
    for j in 2..=n {
        lam_j *= lambda;
        let c = binom_f64(n, j) * lam_j;
        let mut sum = 0.0;
        let mut sum_x = 0.0;
        let mut sum_y = 0.0;
        for a in 0..=(j - 2) {
            let b = j - 2 - a;
            // x^{a+1} y^{b+1}
            let xa = x.powi(a as i32);
            let yb = y.powi(b as i32);
            sum += xa * x * yb * y;
            sum_x += (a + 1) as f64 * xa * yb * y;
            sum_y += (b + 1) as f64 * xa * x * yb;
        }
        g += c * sum;
        gx += c * sum_x;
        gy += c * sum_y;
    }
    (g, gx, gy)
}

fn one_plus_lambda_x_pow(k: u32, lambda: f64) -> Result<RealPolynomial> {
    let lam = rational_from_f64(lambda)?;
    Ok(RealPolynomial::linear(BigRational::one(), lam).pow(k))
}

/// `(1 + λx)^k - λ^(k-m) x^(k-m-1)`; when `m + r = k - 2` its positive roots
/// are exactly the `h` values of the off-diagonal solutions.
pub fn alternating_h_polynomial(k: u32, m: u32, lambda: f64) -> Result<RealPolynomial> {
    check_positive("activity", lambda)?;
    if m + 2 > k {
        return Err(Error::InvalidParameter(format!(
            "need m <= k - 2, got m={m}, k={k}"
        )));
    }
    let lam = rational_from_f64(lambda)?;
    let e = (k - m) as usize;
    let tail = RealPolynomial::monomial(num_traits::pow(lam, e), e - 1);
    Ok(&one_plus_lambda_x_pow(k, lambda)? - &tail)
}

/// `(1 + λy)^k - λ^(m+2) y^(m+1)`: the companion equation for the `l` values.
pub fn alternating_l_polynomial(k: u32, m: u32, lambda: f64) -> Result<RealPolynomial> {
    check_positive("activity", lambda)?;
    if m + 2 > k {
        return Err(Error::InvalidParameter(format!(
            "need m <= k - 2, got m={m}, k={k}"
        )));
    }
    let lam = rational_from_f64(lambda)?;
    let e = (m + 2) as usize;
    let tail = RealPolynomial::monomial(num_traits::pow(lam, e), e - 1);
    Ok(&one_plus_lambda_x_pow(k, lambda)? - &tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyroot::{descartes_sign_changes, isolate_positive_roots, refine_root};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn direct_difference(n: u32, lam: f64, x: f64, y: f64) -> f64 {
        x * (1.0 + lam * y).powi(n as i32) - y * (1.0 + lam * x).powi(n as i32)
    }

    #[test]
    fn n2_is_linear() {
        let lam = 3.0;
        let y = 0.25;
        let p = g_poly(2, lam, y).unwrap();
        assert_eq!(p, RealPolynomial::from_f64(&[-1.0, lam * lam * y]).unwrap());
        assert_eq!(descartes_sign_changes(&p), Ok(1));
    }

    #[test]
    fn n3_matches_printed_branch() {
        // 3λ²xy + λ³xy(x + y) - 1
        let (lam, x, y) = (1.7, 0.31, 0.12);
        let p = g_poly(3, lam, y).unwrap();
        let expected = lam * lam * x * y * (3.0 + lam * (x + y)) - 1.0;
        assert_abs_diff_eq!(p.eval_f64(x), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(g_value(3, lam, x, y), expected, epsilon = 1e-14);
    }

    #[test]
    fn rejects_small_gap() {
        assert!(g_poly(1, 1.0, 0.5).is_err());
        assert!(multiplicity_poly(0, 1.0).is_err());
    }

    #[test]
    fn multiplicity_examples() {
        let lam = 5.0;
        let p = multiplicity_poly(2, lam).unwrap();
        let b = isolate_positive_roots(&p, f64::INFINITY).unwrap();
        assert_eq!(b.len(), 1);
        assert_abs_diff_eq!(refine_root(&p, &b[0], 1e-14).unwrap(), 1.0 / lam, epsilon = 1e-13);

        let p = multiplicity_poly(3, lam).unwrap();
        let expected = RealPolynomial::from_f64(&[-1.0, 0.0, 3.0 * lam * lam, 2.0 * lam.powi(3)]).unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn factor_polynomials_for_k3() {
        // (1 + λx)^3 - λ^2 x
        let p = alternating_h_polynomial(3, 1, 8.0).unwrap();
        assert_eq!(p, RealPolynomial::from_f64(&[1.0, 24.0 - 64.0, 192.0, 512.0]).unwrap());
        assert!(alternating_h_polynomial(3, 2, 8.0).is_err());
    }

    proptest! {
        #[test]
        fn factorization_identity(
            n in 2u32..8, lam in 0.05f64..20.0, x in 0.001f64..1.0, y in 0.001f64..1.0,
        ) {
            let lhs = direct_difference(n, lam, x, y);
            let rhs = (y - x) * g_value(n, lam, x, y);
            let scale = (x * (1.0 + lam * y).powi(n as i32)).max(y * (1.0 + lam * x).powi(n as i32)).max(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-11 * scale);
        }

        #[test]
        fn g_has_one_positive_root(n in 2u32..9, lam in 0.01f64..100.0, y in 1e-4f64..1.0) {
            let p = g_poly(n, lam, y).unwrap();
            prop_assert_eq!(descartes_sign_changes(&p).unwrap(), 1);
            prop_assert_eq!(isolate_positive_roots(&p, f64::INFINITY).unwrap().len(), 1);
        }

        #[test]
        fn multiplicity_poly_is_diagonal(n in 2u32..8, lam in 0.05f64..20.0, x in 0.001f64..1.0) {
            let p = multiplicity_poly(n, lam).unwrap();
            let d = g_value(n, lam, x, x);
            prop_assert!((p.eval_f64(x) - d).abs() <= 1e-9 * d.abs().max(1.0));
            prop_assert_eq!(descartes_sign_changes(&p).unwrap(), 1);
        }

        #[test]
        fn partials_match_finite_differences(
            n in 2u32..7, lam in 0.1f64..10.0, x in 0.05f64..0.9, y in 0.05f64..0.9,
        ) {
            let (_, gx, gy) = g_partials(n, lam, x, y);
            let h = 1e-6;
            let fx = (g_value(n, lam, x + h, y) - g_value(n, lam, x - h, y)) / (2.0 * h);
            let fy = (g_value(n, lam, x, y + h) - g_value(n, lam, x, y - h)) / (2.0 * h);
            prop_assert!((gx - fx).abs() <= 1e-5 * gx.abs().max(1.0));
            prop_assert!((gy - fy).abs() <= 1e-5 * gy.abs().max(1.0));
        }
    }
}
