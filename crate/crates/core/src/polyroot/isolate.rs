//! Sign-change counting, Sturm-sequence root isolation and bracketed refinement.

use num_rational::BigRational;
use serde::Serialize;

use super::polynomial::{rational_from_f64, rational_to_f64, signum, RealPolynomial};
use crate::error::{Error, Result};

/// Default bracket width for [`refine_root`].
pub const DEFAULT_REFINE_TOL: f64 = 1e-12;

/// An interval `(lo, hi)` holding exactly one distinct real root.
///
/// Endpoints produced by [`isolate_positive_roots`] are never roots
/// themselves, so the squarefree part changes sign across every bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub multiplicity: usize,
}

impl RootBracket {
    /// Parity hint: whether `p` itself changes sign across the bracket.
    pub fn changes_sign(&self) -> bool {
        self.multiplicity % 2 == 1
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Number of sign changes in the nonzero coefficient sequence.
pub fn descartes_sign_changes(p: &RealPolynomial) -> Result<usize> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let signs: Vec<i32> = p
        .coeffs()
        .iter()
        .map(signum)
        .filter(|&s| s != 0)
        .collect();
    Ok(signs.windows(2).filter(|w| w[0] != w[1]).count())
}

#[derive(Debug, Clone)]
pub struct SturmSequence {
    polys: Vec<RealPolynomial>,
}

impl SturmSequence {
    pub fn new(p: &RealPolynomial) -> Self {
        let mut polys = vec![p.clone()];
        let d = p.derivative();
        if !d.is_zero() {
            polys.push(d.normalize_leading());
            loop {
                let n = polys.len();
                let (_, r) = polys[n - 2].div_rem(&polys[n - 1]);
                if r.is_zero() {
                    break;
                }
                polys.push((-&r).normalize_leading());
            }
        }
        Self { polys }
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    fn variations(signs: impl Iterator<Item = i32>) -> usize {
        let mut last = 0;
        let mut count = 0;
        for s in signs.filter(|&s| s != 0) {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    pub fn variations_at(&self, x: &BigRational) -> usize {
        Self::variations(self.polys.iter().map(|p| signum(&p.eval(x))))
    }

    /// Distinct real roots in the half-open interval `(a, b]`.
    pub fn count_between(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations_at(a).saturating_sub(self.variations_at(b))
    }
}

/// Distinct real roots of `p` in `(a, b]` (exact).
pub fn count_roots_between(p: &RealPolynomial, a: f64, b: f64) -> Result<usize> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let s = SturmSequence::new(p);
    Ok(s.count_between(&rational_from_f64(a)?, &rational_from_f64(b)?))
}

fn bound_as_f64(p: &RealPolynomial) -> f64 {
    // round up to a power of two so the bound is exactly representable
    let b = rational_to_f64(&p.cauchy_bound());
    let mut out = 1.0f64;
    while out <= b {
        out *= 2.0;
    }
    out
}

/// Nudges `x` toward `toward` until `p(x) != 0`.
fn avoid_root(p: &RealPolynomial, mut x: f64, toward: f64) -> f64 {
    while p.sign_at(x) == 0 {
        let next = if toward > x {
            x + (toward - x) * 1e-9
        } else {
            x - (x - toward) * 1e-9
        };
        if next == x {
            break;
        }
        x = next;
    }
    x
}

fn split_point(p: &RealPolynomial, lo: f64, hi: f64) -> Option<f64> {
    const FRACTIONS: [f64; 7] = [0.5, 0.46875, 0.53125, 0.4375, 0.5625, 0.40625, 0.59375];
    FRACTIONS.iter().find_map(|&t| {
        let m = lo + (hi - lo) * t;
        (m > lo && m < hi && p.sign_at(m) != 0).then_some(m)
    })
}

fn multiplicity_in(p: &RealPolynomial, lo: &BigRational, hi: &BigRational) -> usize {
    let mut mult = 1;
    let mut q = p.gcd(&p.derivative());
    while q.degree().unwrap_or(0) >= 1 && SturmSequence::new(&q).count_between(lo, hi) >= 1 {
        mult += 1;
        q = q.gcd(&q.derivative());
    }
    mult
}

/// Isolates every distinct real root of `p` in the open interval `(lo, hi)`.
pub fn isolate_roots_in(p: &RealPolynomial, lo: f64, hi: f64) -> Result<Vec<RootBracket>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !(lo < hi) || lo.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "empty isolation interval ({lo}, {hi})"
        )));
    }
    if p.degree() == Some(0) {
        return Ok(Vec::new());
    }
    let bound = bound_as_f64(p);
    let mut lo = lo.max(-bound);
    let mut hi = hi.min(bound);
    if lo >= hi {
        return Ok(Vec::new());
    }
    // Keep the endpoints off the root set; an endpoint root is outside the
    // open interval anyway.
    lo = avoid_root(p, lo, hi);
    hi = avoid_root(p, hi, lo);

    let sturm = SturmSequence::new(p);
    let mut out = Vec::new();
    let total = sturm.count_between(&rational_from_f64(lo)?, &rational_from_f64(hi)?);
    let mut stack = vec![(lo, hi, total)];
    while let Some((a, b, count)) = stack.pop() {
        match count {
            0 => {}
            1 => {
                let (ar, br) = (rational_from_f64(a)?, rational_from_f64(b)?);
                out.push(RootBracket {
                    lo: a,
                    hi: b,
                    multiplicity: multiplicity_in(p, &ar, &br),
                });
            }
            _ => match split_point(p, a, b) {
                Some(m) => {
                    let mr = rational_from_f64(m)?;
                    let left = sturm.count_between(&rational_from_f64(a)?, &mr);
                    stack.push((m, b, count - left));
                    stack.push((a, m, left));
                }
                None => {
                    log::warn!("{count} roots unresolved at float resolution in ({a}, {b})");
                    out.push(RootBracket {
                        lo: a,
                        hi: b,
                        multiplicity: count,
                    });
                }
            },
        }
    }
    out.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    Ok(out)
}

/// Disjoint brackets, one per distinct real root of `p` in `(0, domain_hi)`.
///
/// `domain_hi` may be `f64::INFINITY`, in which case the Cauchy bound is used.
pub fn isolate_positive_roots(p: &RealPolynomial, domain_hi: f64) -> Result<Vec<RootBracket>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !(domain_hi > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "domain upper end must be positive, got {domain_hi}"
        )));
    }
    let (deflated, _) = p.deflate_zero_roots();
    isolate_roots_in(&deflated, 0.0, domain_hi)
}

/// Shrinks `bracket` around its root until its width is at most `tol`.
///
/// Works on the squarefree part of `p`, so even-multiplicity roots refine like
/// simple ones. Newton steps are taken when they land inside the bracket and
/// halve it; otherwise the step falls back to bisection. Every sign decision
/// is exact.
pub fn refine_root(p: &RealPolynomial, bracket: &RootBracket, tol: f64) -> Result<f64> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let s = p.squarefree_part();
    let ds = s.derivative();
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let s_lo = s.sign_at(lo);
    if s_lo == 0 {
        return Ok(lo);
    }
    let s_hi = s.sign_at(hi);
    if s_hi == 0 {
        return Ok(hi);
    }
    if s_lo == s_hi {
        return Err(Error::NoSignChange { lo, hi });
    }

    let mut x = 0.5 * (lo + hi);
    let mut use_newton = true;
    for _ in 0..400 {
        let width = hi - lo;
        if width <= tol {
            break;
        }
        let mid = lo + 0.5 * width;
        if mid <= lo || mid >= hi {
            break;
        }
        let mut cand = mid;
        if use_newton {
            let (f, df) = (s.eval_f64(x), ds.eval_f64(x));
            let step = x - f / df;
            if step.is_finite() && step > lo && step < hi {
                cand = step;
            }
        }
        match s.sign_at(cand) {
            0 => return Ok(cand),
            sg if sg == s_lo => lo = cand,
            _ => hi = cand,
        }
        // probe across a Newton iterate to collapse the far side
        if cand != mid {
            let probe = if lo == cand {
                (cand + 0.5 * tol).min(hi)
            } else {
                (cand - 0.5 * tol).max(lo)
            };
            if probe > lo && probe < hi {
                match s.sign_at(probe) {
                    0 => return Ok(probe),
                    sg if sg == s_lo => lo = probe,
                    _ => hi = probe,
                }
            }
        }
        use_newton = hi - lo <= 0.5 * width;
        x = cand;
    }
    Ok((lo + 0.5 * (hi - lo)).clamp(bracket.lo, bracket.hi))
}

/// All distinct real roots in `(lo, hi)`, isolated then refined to `tol`.
pub fn real_roots_in(p: &RealPolynomial, lo: f64, hi: f64, tol: f64) -> Result<Vec<f64>> {
    isolate_roots_in(p, lo, hi)?
        .iter()
        .map(|b| refine_root(p, b, tol))
        .collect()
}

/// Exact test for a repeated real root inside `(lo, hi]`.
pub fn has_multiple_root_in(p: &RealPolynomial, lo: f64, hi: f64) -> Result<bool> {
    let g = p.gcd(&p.derivative());
    if g.degree().unwrap_or(0) == 0 {
        return Ok(false);
    }
    Ok(count_roots_between(&g, lo, hi)? > 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cubic_k3(lambda: f64) -> RealPolynomial {
        // (1 + λx)^3 - λ^2 x
        let lin = RealPolynomial::from_f64(&[1.0, lambda]).unwrap();
        &lin.pow(3) - &RealPolynomial::from_f64(&[0.0, lambda * lambda]).unwrap()
    }

    #[test]
    fn descartes_examples() {
        assert_eq!(descartes_sign_changes(&RealPolynomial::from_i64(&[-1, 0, 1])), Ok(1));
        assert_eq!(descartes_sign_changes(&RealPolynomial::from_i64(&[2, -3, 1])), Ok(2));
        assert_eq!(
            descartes_sign_changes(&RealPolynomial::zero()),
            Err(Error::ZeroPolynomial)
        );
    }

    #[test]
    fn isolates_sqrt_two() {
        let p = RealPolynomial::from_i64(&[-2, 0, 1]);
        let b = isolate_positive_roots(&p, 2.0).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].contains(2f64.sqrt()));
        assert_eq!(b[0].multiplicity, 1);
        let x = refine_root(&p, &RootBracket { lo: 1.0, hi: 2.0, multiplicity: 1 }, 1e-12).unwrap();
        assert_abs_diff_eq!(x, std::f64::consts::SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn derivative_cubic_has_two_positive_roots() {
        let p = RealPolynomial::from_i64(&[1, -16, 41, 10]);
        let b = isolate_positive_roots(&p, f64::INFINITY).unwrap();
        assert_eq!(b.len(), 2);
        let r: Vec<f64> = b.iter().map(|b| refine_root(&p, b, 1e-13).unwrap()).collect();
        assert_abs_diff_eq!(r[0], 0.078658955, epsilon = 1e-8);
        assert_abs_diff_eq!(r[1], 0.284824838, epsilon = 1e-8);
    }

    #[test]
    fn double_root_at_critical_activity() {
        let p = cubic_k3(6.75);
        let b = isolate_positive_roots(&p, 1.0).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].multiplicity, 2);
        assert!(!b[0].changes_sign());
        let x = refine_root(&p, &b[0], 1e-14).unwrap();
        assert_abs_diff_eq!(x, 2.0 / 27.0, epsilon = 1e-13);
        assert!(has_multiple_root_in(&p, 0.0, 1.0).unwrap());
        for lambda in [6.75 - 1e-6, 6.75 + 1e-6, 6.75 - 1e-9, 6.75 + 1e-9] {
            assert!(!has_multiple_root_in(&cubic_k3(lambda), 0.0, 1.0).unwrap());
        }
    }

    #[test]
    fn supercritical_cubic_smaller_root() {
        // Oracle: dense sign scan on f64 followed by plain bisection.
        let lambda = 8.0;
        let f = |x: f64| (1.0 + lambda * x).powi(3) - lambda * lambda * x;
        let xs: Vec<f64> = (0..=100_000).map(|i| i as f64 * 1e-5).collect();
        let cell = xs.windows(2).find(|w| f(w[0]) * f(w[1]) < 0.0).unwrap();
        let (mut a, mut b) = (cell[0], cell[1]);
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if f(a) * f(m) <= 0.0 {
                b = m
            } else {
                a = m
            }
        }
        let p = cubic_k3(lambda);
        let brackets = isolate_positive_roots(&p, 1.0).unwrap();
        assert_eq!(brackets.len(), 2);
        let x = refine_root(&p, &brackets[0], DEFAULT_REFINE_TOL).unwrap();
        assert!(f(x).abs() < 1e-10);
        assert_abs_diff_eq!(x, 0.5 * (a + b), epsilon = 1e-11);
    }

    #[test]
    fn refine_rejects_bracket_without_root() {
        let p = RealPolynomial::from_i64(&[-2, 0, 1]);
        let err = refine_root(&p, &RootBracket { lo: 2.0, hi: 3.0, multiplicity: 1 }, 1e-9);
        assert!(matches!(err, Err(Error::NoSignChange { .. })));
    }

    #[test]
    fn endpoint_roots_are_excluded() {
        // roots at 1 and 2; domain (0, 2) sees only the root at 1, which is
        // also the first bisection midpoint
        let p = RealPolynomial::from_i64(&[2, -3, 1]);
        let b = isolate_positive_roots(&p, 2.0).unwrap();
        assert_eq!(b.len(), 1);
        assert_abs_diff_eq!(refine_root(&p, &b[0], 1e-12).unwrap(), 1.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn positive_root_count_bounded_by_descartes(
            coeffs in prop::collection::vec(-20i64..20, 2..7),
            lead in 1i64..10,
        ) {
            let mut c = coeffs.clone();
            c.push(lead);
            let p = RealPolynomial::from_i64(&c);
            let roots = isolate_positive_roots(&p, f64::INFINITY).unwrap();
            let counted: usize = roots.iter().map(|b| b.multiplicity).sum();
            let v = descartes_sign_changes(&p).unwrap();
            prop_assert!(counted <= v);
            prop_assert_eq!((v - counted) % 2, 0);
        }

        #[test]
        fn refined_root_stays_in_bracket(
            roots in prop::collection::vec(-5.0f64..5.0, 1..5),
        ) {
            let mut p = RealPolynomial::from_i64(&[1]);
            for r in &roots {
                p = &p * &RealPolynomial::from_f64(&[-r, 1.0]).unwrap();
            }
            for b in isolate_roots_in(&p, -8.0, 8.0).unwrap() {
                let x = refine_root(&p, &b, 1e-12).unwrap();
                prop_assert!(b.contains(x));
            }
        }
    }
}
