//! The alternating `(m, r)` fixed-point system for a pair of boundary-law
//! values `(h, l)`:
//!
//! ```text
//! h = (1 + λh)^-m (1 + λl)^-(k-m)
//! l = (1 + λl)^-r (1 + λh)^-(k-r)
//! ```
//!
//! An `h`-labelled vertex has `m` children labelled `h` and `k - m` labelled
//! `l`; an `l`-labelled vertex has `r` children labelled `l` and `k - r`
//! labelled `h`. The diagonal `h = l` is the translation-invariant solution.

mod factor;
mod periodic;
mod solve;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

pub use factor::{alternating_h_polynomial, alternating_l_polynomial, g_partials, g_poly, g_value, multiplicity_poly};
pub use periodic::{wp_invariant_solutions, wp_residual};
pub use solve::{
    scan_grid, solve_all, solve_all_with, Solution, SolutionClass, SolutionSet, SolveOptions,
};

/// Order `k`, activity `λ` and the scheme counts `(m, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    k: u32,
    lambda: f64,
    m: u32,
    r: u32,
}

impl ModelParams {
    pub fn new(k: u32, lambda: f64, m: u32, r: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!("order k must be >= 2, got {k}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "activity must be positive and finite, got {lambda}"
            )));
        }
        if m > k || r > k {
            return Err(Error::InvalidParameter(format!(
                "scheme counts must satisfy 0 <= m, r <= k; got m={m}, r={r}, k={k}"
            )));
        }
        Ok(Self { k, lambda, m, r })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// `n = k - m - r`; non-diagonal solutions need `n >= 2`.
    pub fn gap(&self) -> i64 {
        self.k as i64 - self.m as i64 - self.r as i64
    }

    /// The same system with the roles of `h` and `l` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            m: self.r,
            r: self.m,
            ..*self
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.k, lambda, self.m, self.r)
    }
}

/// A positive pair of boundary-law values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldPair {
    pub h: f64,
    pub l: f64,
}

impl FieldPair {
    pub fn new(h: f64, l: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite() && l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "field values must be positive and finite, got ({h}, {l})"
            )));
        }
        Ok(Self { h, l })
    }

    pub fn swapped(&self) -> Self {
        Self { h: self.l, l: self.h }
    }

    pub fn max_distance(&self, other: &Self) -> f64 {
        (self.h - other.h).abs().max((self.l - other.l).abs())
    }
}

impl fmt::Display for FieldPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.h, self.l)
    }
}

fn inv_pow(base: f64, e: u32) -> f64 {
    base.powi(-(e as i32))
}

/// Residuals of both equations at `f`.
pub fn residual(p: &ModelParams, f: &FieldPair) -> (f64, f64) {
    let (k, m, r, lam) = (p.k, p.m, p.r, p.lambda);
    let a = 1.0 + lam * f.h;
    let b = 1.0 + lam * f.l;
    (
        f.h - inv_pow(a, m) * inv_pow(b, k - m),
        f.l - inv_pow(b, r) * inv_pow(a, k - r),
    )
}

/// Largest absolute residual.
pub fn max_residual(p: &ModelParams, f: &FieldPair) -> f64 {
    let (a, b) = residual(p, f);
    a.abs().max(b.abs())
}

fn check_activity(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "activity must be positive and finite, got {lambda}"
        )))
    }
}

/// The unique `z` in `(0, 1]` with `z (1 + λz)^k = 1`, bisected to width `tol`.
pub fn ti_solve(k: u32, lambda: f64, tol: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidParameter("order k must be >= 1".into()));
    }
    check_activity(lambda)?;
    let phi = |z: f64| z.ln() + k as f64 * (lambda * z).ln_1p();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if phi(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// The unique `y > 0` with `y (1 + λy)^r = (1 + λx)^-(k-r)`.
///
/// `t ↦ t(1 + λt)^r` is strictly increasing, so the root is unique. It is
/// found by bracketed Newton on `ln y`: the log form is increasing and convex
/// with slope in `[1, r + 1]`, so iterates from the right converge
/// monotonically; a bisection step is taken whenever an iterate leaves the
/// bracket.
pub fn y_given_x(p: &ModelParams, x: f64, tol: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    Ok(y_given_x_unchecked(p, x, tol))
}

pub(crate) fn y_given_x_unchecked(p: &ModelParams, x: f64, tol: f64) -> f64 {
    let (k, r, lam) = (p.k, p.r, p.lambda);
    let log_c = -((k - r) as f64) * (lam * x).ln_1p();
    if r == 0 {
        return log_c.exp();
    }
    let rf = r as f64;
    let psi = |u: f64| u + rf * (lam * u.exp()).ln_1p() - log_c;
    // psi(log_c) >= 0, psi(log_c - r ln(1 + λ)) <= 0 since y <= 1
    let mut hi = log_c;
    let mut lo = log_c - rf * lam.ln_1p() - 1.0;
    let mut u = hi;
    for _ in 0..200 {
        let v = psi(u);
        if v == 0.0 {
            return u.exp();
        }
        if v > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let t = lam * u.exp();
        let dpsi = 1.0 + rf * t / (1.0 + t);
        let mut next = u - v / dpsi;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - u).abs() <= tol || hi - lo <= tol;
        u = next;
        if done {
            break;
        }
    }
    u.exp()
}

/// `|x (1 + λx)^t - y (1 + λy)^t|` with `t = m + r - k`; vanishes on every
/// solution because the first equation divided by the second gives it.
pub fn ratio_invariant_check(p: &ModelParams, f: &FieldPair) -> f64 {
    let t = -(p.gap() as i32);
    let lam = p.lambda;
    (f.h * (1.0 + lam * f.h).powi(t) - f.l * (1.0 + lam * f.l).powi(t)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(a) * f(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1, 1.0, 0, 0).is_err());
        assert!(ModelParams::new(3, 0.0, 0, 0).is_err());
        assert!(ModelParams::new(3, 1.0, 4, 0).is_err());
        let p = ModelParams::new(4, 2.0, 1, 0).unwrap();
        assert_eq!(p.gap(), 3);
        assert_eq!(p.swapped().m(), 0);
        assert_eq!(p.swapped().r(), 1);
    }

    #[test]
    fn statement_pair_at_critical_activity_is_exact() {
        let p = ModelParams::new(3, 6.75, 1, 0).unwrap();
        let (a, b) = residual(&p, &FieldPair::new(2.0 / 27.0, 8.0 / 27.0).unwrap());
        assert!(a.abs() < 1e-12 && b.abs() < 1e-12);
    }

    #[test]
    fn diagonal_of_ti_root_has_zero_residual() {
        for (k, lam, m, r) in [(3, 2.0, 1, 0), (4, 7.5, 2, 1), (5, 0.3, 0, 0)] {
            let z = ti_solve(k, lam, 1e-16).unwrap();
            let p = ModelParams::new(k, lam, m, r).unwrap();
            assert!(max_residual(&p, &FieldPair::new(z, z).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn closed_form_pair_for_k4_m1_r1() {
        let lam = 20.0f64;
        let s = lam.sqrt();
        let d = (lam - 4.0 * s).sqrt();
        let big = (s - 2.0 + d) / (2.0 * lam);
        let small = (s - 2.0 - d) / (2.0 * lam);
        let p = ModelParams::new(4, lam, 1, 1).unwrap();
        assert!(max_residual(&p, &FieldPair::new(big, small).unwrap()) < 1e-10);
        assert_abs_diff_eq!(y_given_x(&p, big, 1e-15).unwrap(), small, epsilon = 1e-9);
    }

    #[test]
    fn ti_solve_matches_bisection_oracle() {
        let oracle = bisect(|z| z * (1.0 + z).powi(2) - 1.0, 0.0, 1.0);
        assert_abs_diff_eq!(oracle, 0.46557123187676, epsilon = 1e-12);
        assert_abs_diff_eq!(ti_solve(2, 1.0, 1e-15).unwrap(), oracle, epsilon = 1e-14);

        let lam = 27.0 / 16.0;
        let z = ti_solve(3, lam, 1e-16).unwrap();
        let oracle = bisect(|z| z * (1.0 + lam * z).powi(3) - 1.0, 0.0, 1.0);
        assert_abs_diff_eq!(z, oracle, epsilon = 1e-15);
        assert!(((1.0 + lam * z).powi(3) - 1.0 / z).abs() < 1e-12);
        // at the m = r = 0 threshold the TI root sits at 1/(λ(k - 1)) = 8/27
        assert_abs_diff_eq!(z, 8.0 / 27.0, epsilon = 1e-14);
    }

    #[test]
    fn ti_solve_small_activity_limit() {
        for k in [1, 2, 5] {
            assert!(ti_solve(k, 1e-12, 1e-16).unwrap() > 1.0 - 1e-10);
        }
        assert!(ti_solve(0, 1.0, 1e-12).is_err());
        assert!(ti_solve(2, -1.0, 1e-12).is_err());
    }

    #[test]
    fn y_given_x_explicit_branch_and_ti_consistency() {
        let p = ModelParams::new(3, 4.0, 1, 0).unwrap();
        assert_eq!(y_given_x(&p, 0.2, 1e-14).unwrap(), (1.0f64 + 0.8).powi(-3));
        for (k, lam, m, r) in [(4, 3.0, 1, 2), (5, 11.0, 0, 3), (3, 0.5, 2, 1)] {
            let p = ModelParams::new(k, lam, m, r).unwrap();
            let z = ti_solve(k, lam, 1e-16).unwrap();
            assert_abs_diff_eq!(y_given_x(&p, z, 1e-15).unwrap(), z, epsilon = 1e-14);
        }
        assert!(y_given_x(&p, 0.0, 1e-14).is_err());
    }

    #[test]
    fn ratio_invariant_examples() {
        let p = ModelParams::new(3, 6.75, 1, 0).unwrap();
        assert!(ratio_invariant_check(&p, &FieldPair::new(2.0 / 27.0, 8.0 / 27.0).unwrap()) < 1e-12);
        let z = ti_solve(3, 6.75, 1e-16).unwrap();
        assert_eq!(ratio_invariant_check(&p, &FieldPair::new(z, z).unwrap()), 0.0);
    }

    proptest! {
        #[test]
        fn y_given_x_solves_second_equation(
            k in 2u32..7, r_frac in 0.0f64..1.0, lam in 0.01f64..200.0, x in 1e-6f64..1.0,
        ) {
            let r = ((k as f64) * r_frac).floor() as u32;
            let p = ModelParams::new(k, lam, 0, r).unwrap();
            let y = y_given_x(&p, x, 1e-15).unwrap();
            let lhs = y.ln() + r as f64 * (lam * y).ln_1p();
            let rhs = -((k - r) as f64) * (lam * x).ln_1p();
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn swap_symmetry_of_residuals(
            k in 2u32..7, m in 0u32..7, r in 0u32..7, lam in 0.01f64..50.0,
            h in 0.001f64..1.0, l in 0.001f64..1.0,
        ) {
            prop_assume!(m <= k && r <= k);
            let p = ModelParams::new(k, lam, m, r).unwrap();
            let (a, b) = residual(&p, &FieldPair::new(h, l).unwrap());
            let (c, d) = residual(&p.swapped(), &FieldPair::new(l, h).unwrap());
            prop_assert_eq!(a, d);
            prop_assert_eq!(b, c);
        }
    }
}
