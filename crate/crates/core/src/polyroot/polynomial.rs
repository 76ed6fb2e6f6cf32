//! Exact-coefficient univariate polynomials.
//!
//! Coefficients are stored as arbitrary-precision rationals in ascending
//! degree order. Floating-point inputs are converted exactly (every finite
//! `f64` is a dyadic rational), so sign queries and Sturm counts computed on
//! a `RealPolynomial` are exact for the polynomial whose coefficients are the
//! given values.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact conversion of a finite `f64` into a rational.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::InvalidParameter(format!("non-finite coefficient {x}")))
}

/// Nearest `f64` to a rational.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct RealPolynomial {
    coeffs: Vec<BigRational>,
}

impl RealPolynomial {
    /// Builds a polynomial from ascending coefficients, dropping trailing zeros.
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_f64(coeffs: &[f64]) -> Result<Self> {
        coeffs
            .iter()
            .map(|&c| rational_from_f64(c))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// `a + b x`
    pub fn linear(a: BigRational, b: BigRational) -> Self {
        Self::new(vec![a, b])
    }

    /// `c x^n`
    pub fn monomial(c: BigRational, n: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); n + 1];
        coeffs[n] = c;
        Self::new(coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Exact sign of `p(x)` at a floating-point abscissa.
    pub fn sign_at(&self, x: f64) -> i32 {
        let xr = rational_from_f64(x).expect("finite abscissa");
        signum(&self.eval(&xr))
    }

    /// Horner evaluation in floating point.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + rational_to_f64(c))
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(BigRational::one());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Rescales by `1/|lc|` so the leading coefficient is `±1`; signs are kept.
    pub fn normalize_leading(&self) -> Self {
        match self.leading() {
            Some(lc) => self.scale(&(BigRational::one() / lc.abs())),
            None => Self::zero(),
        }
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(lc) => self.scale(&(BigRational::one() / lc)),
            None => Self::zero(),
        }
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lc = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / &lc;
            if !c.is_zero() {
                for (j, dc) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * dc;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.normalize_leading();
        }
        a.monic()
    }

    /// `p / gcd(p, p')`: same distinct roots, all simple.
    pub fn squarefree_part(&self) -> Self {
        if self.degree().unwrap_or(0) < 1 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            return self.clone();
        }
        self.div_rem(&g).0
    }

    /// Removes the factor `x^j` with maximal `j`.
    pub fn deflate_zero_roots(&self) -> (Self, usize) {
        let j = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if self.is_zero() {
            return (Self::zero(), 0);
        }
        (Self::new(self.coeffs[j..].to_vec()), j)
    }

    /// Cauchy bound: every real root lies in `(-B, B)`.
    pub fn cauchy_bound(&self) -> BigRational {
        let lc = match self.leading() {
            Some(lc) => lc.abs(),
            None => return BigRational::one(),
        };
        let n = self.coeffs.len() - 1;
        let max = self.coeffs[..n]
            .iter()
            .map(|c| c.abs() / &lc)
            .fold(BigRational::zero(), |m, c| if c > m { c } else { m });
        max + BigRational::one()
    }
}

pub(crate) fn signum(x: &BigRational) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

impl fmt::Debug for RealPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealPolynomial({self})")
    }
}

impl fmt::Display for RealPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let v = rational_to_f64(c);
            if first {
                write!(f, "{v}")?;
            } else if v < 0.0 {
                write!(f, " - {}", -v)?;
            } else {
                write!(f, " + {v}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "·x")?,
                _ => write!(f, "·x^{i}")?,
            }
            first = false;
        }
        Ok(())
    }
}

impl Add for &RealPolynomial {
    type Output = RealPolynomial;
    fn add(self, rhs: Self) -> RealPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RealPolynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &RealPolynomial {
    type Output = RealPolynomial;
    fn sub(self, rhs: Self) -> RealPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RealPolynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &RealPolynomial {
    type Output = RealPolynomial;
    fn mul(self, rhs: Self) -> RealPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return RealPolynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RealPolynomial::new(out)
    }
}

impl Neg for &RealPolynomial {
    type Output = RealPolynomial;
    fn neg(self) -> RealPolynomial {
        RealPolynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn trailing_zeros_are_dropped() {
        let p = RealPolynomial::from_i64(&[1, 2, 0, 0]);
        assert_eq!(p.degree(), Some(1));
        assert!(RealPolynomial::from_i64(&[0, 0]).is_zero());
    }

    #[test]
    fn division_recovers_factors() {
        // (x - 1)(x + 2)(x - 3)
        let a = RealPolynomial::from_i64(&[-1, 1]);
        let b = RealPolynomial::from_i64(&[2, 1]);
        let c = RealPolynomial::from_i64(&[-3, 1]);
        let p = &(&a * &b) * &c;
        let (quot, rem) = p.div_rem(&b);
        assert!(rem.is_zero());
        assert_eq!(quot, &a * &c);
    }

    #[test]
    fn gcd_and_squarefree_part() {
        // (x - 1)^2 (x + 1)
        let p = RealPolynomial::from_i64(&[1, -1, -1, 1]);
        let g = p.gcd(&p.derivative());
        assert_eq!(g, RealPolynomial::from_i64(&[-1, 1]));
        let s = p.squarefree_part().monic();
        assert_eq!(s, RealPolynomial::from_i64(&[-1, 0, 1]));
    }

    #[test]
    fn exact_float_conversion() {
        let p = RealPolynomial::from_f64(&[0.1, 6.75]).unwrap();
        assert_eq!(p.coeff(1), q(27, 4));
        assert!(RealPolynomial::from_f64(&[f64::NAN]).is_err());
    }

    #[test]
    fn binomial_power_expansion() {
        let p = RealPolynomial::from_i64(&[1, 2]).pow(3);
        assert_eq!(p, RealPolynomial::from_i64(&[1, 6, 12, 8]));
        assert_eq!(p.eval(&q(1, 2)), q(8, 1));
    }
}
