//! Weakly periodic boundary laws for an index-two subgroup.
//!
//! The four unknowns `z1..z4` are indexed by the coset pair of a vertex and
//! its parent; `i` is the number of neighbours in the subgroup.

use crate::error::{Error, Result};

use super::{solve_all, FieldPair, ModelParams};

fn check(k: u32, i: u32, lambda: f64) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("order k must be >= 2, got {k}")));
    }
    if i < 1 || i > k {
        return Err(Error::InvalidParameter(format!("need 1 <= i <= k, got i={i}, k={k}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("activity must be positive, got {lambda}")));
    }
    Ok(())
}

/// Residuals of the four weakly periodic equations.
pub fn wp_residual(k: u32, i: u32, lambda: f64, z: [f64; 4]) -> Result<[f64; 4]> {
    check(k, i, lambda)?;
    if z.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter(format!("all components must be positive, got {z:?}")));
    }
    let p = |v: f64, e: u32| (1.0 + lambda * v).powi(-(e as i32));
    let [z1, z2, z3, z4] = z;
    Ok([
        z1 - p(z3, i) * p(z1, k - i),
        z2 - p(z3, i - 1) * p(z1, k - i + 1),
        z3 - p(z2, i - 1) * p(z4, k - i + 1),
        z4 - p(z2, i) * p(z4, k - i),
    ])
}

/// Solutions on the invariant sets `{z1 = z2 = z3 = z4}` and
/// `{z1 = z4, z2 = z3}`.
///
/// On the second set the system is the alternating one with `m = k - i`,
/// `r = i - 1`; since `m + r = k - 1` only the translation-invariant point
/// survives, so both sets give the same single vector.
pub fn wp_invariant_solutions(k: u32, i: u32, lambda: f64, tol: f64) -> Result<Vec<[f64; 4]>> {
    check(k, i, lambda)?;
    let p = ModelParams::new(k, lambda, k - i, i - 1)?;
    let set = solve_all(&p, tol)?;
    let mut out: Vec<[f64; 4]> = Vec::new();
    for s in set.solutions() {
        let FieldPair { h, l } = s.pair;
        let v = [h, l, l, h];
        if !out.iter().any(|w| w.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-9)) {
            out.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ti_solve;

    #[test]
    fn ti_point_is_a_solution() {
        for (k, i, lam) in [(2, 1, 1.0), (3, 2, 5.0), (4, 4, 30.0)] {
            let z = ti_solve(k, lam, 1e-16).unwrap();
            let res = wp_residual(k, i, lam, [z; 4]).unwrap();
            assert!(res.iter().all(|v| v.abs() < 1e-14), "{res:?}");
        }
    }

    #[test]
    fn invariant_set_two_collapses_to_ti() {
        for (k, i, lam) in [(3, 1, 10.0), (3, 3, 50.0), (5, 2, 100.0)] {
            let sols = wp_invariant_solutions(k, i, lam, 1e-12).unwrap();
            assert_eq!(sols.len(), 1);
            let res = wp_residual(k, i, lam, sols[0]).unwrap();
            assert!(res.iter().all(|v| v.abs() < 1e-10));
            let z = ti_solve(k, lam, 1e-16).unwrap();
            assert!((sols[0][0] - z).abs() < 1e-9);
        }
    }

    #[test]
    fn perturbation_is_detected() {
        let z = ti_solve(3, 2.0, 1e-16).unwrap();
        let res = wp_residual(3, 1, 2.0, [z * 1.01, z, z, z]).unwrap();
        assert!(res.iter().any(|v| v.abs() > 1e-4));
    }

    #[test]
    fn argument_checks() {
        assert!(wp_residual(3, 0, 1.0, [0.5; 4]).is_err());
        assert!(wp_residual(3, 4, 1.0, [0.5; 4]).is_err());
        assert!(wp_residual(3, 1, 1.0, [0.5, 0.0, 0.5, 0.5]).is_err());
    }
}
