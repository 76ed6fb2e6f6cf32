//! Closed-form real roots of cubics (Cardano) and quartics (Ferrari).

use serde::Serialize;

use super::isolate::{real_roots_in, DEFAULT_REFINE_TOL};
use super::polynomial::RealPolynomial;
use crate::error::{Error, Result};

/// Relative threshold under which a discriminant is treated as zero.
const DISCRIMINANT_EPS: f64 = 1e-12;

fn horner(coeffs_desc: &[f64], x: f64) -> (f64, f64) {
    let mut f = 0.0;
    let mut df = 0.0;
    for &c in coeffs_desc {
        df = df * x + f;
        f = f * x + c;
    }
    (f, df)
}

/// A few Newton steps, kept only while they reduce the residual.
fn polish(coeffs_desc: &[f64], mut x: f64) -> f64 {
    let mut best = horner(coeffs_desc, x).0.abs();
    for _ in 0..4 {
        let (f, df) = horner(coeffs_desc, x);
        if f == 0.0 || df == 0.0 {
            break;
        }
        let next = x - f / df;
        let r = horner(coeffs_desc, next).0.abs();
        if !(r < best) {
            break;
        }
        x = next;
        best = r;
    }
    x
}

fn sorted_distinct(mut roots: Vec<f64>) -> Vec<f64> {
    roots.retain(|r| r.is_finite());
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
    roots
}

/// Real roots of the depressed cubic `t^3 + p t + q`, unpolished.
fn depressed_cubic(p: f64, q: f64) -> Vec<f64> {
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    let scale = (half_q * half_q).max(third_p.abs().powi(3));
    if scale == 0.0 {
        return vec![0.0];
    }
    if disc.abs() <= DISCRIMINANT_EPS * scale {
        // one simple root and one double root
        return vec![3.0 * q / p, -1.5 * q / p];
    }
    if disc > 0.0 {
        let s = disc.sqrt();
        let u = (-half_q - half_q.signum() * s).cbrt();
        let v = if u == 0.0 { 0.0 } else { -third_p / u };
        vec![u + v]
    } else {
        let r = (-third_p).sqrt();
        let cos_arg = (-half_q / (r * r * r)).clamp(-1.0, 1.0);
        let phi = cos_arg.acos();
        (0..3)
            .map(|j| 2.0 * r * ((phi - 2.0 * std::f64::consts::PI * j as f64) / 3.0).cos())
            .collect()
    }
}

/// Distinct real roots of `a x^3 + b x^2 + c x + d`, ascending.
///
/// A discriminant within a relative `1e-12` of zero selects the
/// double-root branch.
pub fn cardano_real_roots(a: f64, b: f64, c: f64, d: f64) -> Result<Vec<f64>> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "leading cubic coefficient must be nonzero, got {a}"
        )));
    }
    let (bb, cc, dd) = (b / a, c / a, d / a);
    let shift = bb / 3.0;
    let p = cc - bb * bb / 3.0;
    let q = 2.0 * bb * bb * bb / 27.0 - bb * cc / 3.0 + dd;
    let desc = [1.0, bb, cc, dd];
    Ok(sorted_distinct(
        depressed_cubic(p, q)
            .into_iter()
            .map(|t| polish(&desc, t - shift))
            .collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuarticRoots {
    /// Distinct real roots, ascending.
    pub roots: Vec<f64>,
    /// Set when the resolvent cubic was degenerate and the roots came from
    /// Sturm isolation instead.
    pub used_isolation_fallback: bool,
}

fn quadratic_real_roots(b: f64, c: f64, scale: f64) -> Vec<f64> {
    // x^2 + b x + c
    let disc = b * b - 4.0 * c;
    let tiny = 1e-10 * (b * b).max(4.0 * c.abs()).max(scale);
    if disc < -tiny {
        return Vec::new();
    }
    let s = disc.max(0.0).sqrt();
    if s == 0.0 {
        return vec![-0.5 * b];
    }
    let q = -0.5 * (b + b.signum() * s);
    if q == 0.0 {
        return vec![0.5 * s, -0.5 * s];
    }
    vec![q, c / q]
}

fn isolation_fallback(a: f64, b: f64, c: f64, d: f64, e: f64) -> Result<QuarticRoots> {
    let p = RealPolynomial::from_f64(&[e, d, c, b, a])?;
    Ok(QuarticRoots {
        roots: real_roots_in(&p, f64::NEG_INFINITY, f64::INFINITY, DEFAULT_REFINE_TOL)?,
        used_isolation_fallback: true,
    })
}

/// Distinct real roots of `a x^4 + b x^3 + c x^2 + d x + e` by Ferrari's method.
pub fn ferrari_real_roots(a: f64, b: f64, c: f64, d: f64, e: f64) -> Result<QuarticRoots> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "leading quartic coefficient must be nonzero, got {a}"
        )));
    }
    let (bb, cc, dd, ee) = (b / a, c / a, d / a, e / a);
    let shift = bb / 4.0;
    let b2 = bb * bb;
    // depressed: y^4 + p y^2 + q y + r, x = y - b/4
    let p = cc - 3.0 * b2 / 8.0;
    let q = dd - bb * cc / 2.0 + b2 * bb / 8.0;
    let r = ee - bb * dd / 4.0 + b2 * cc / 16.0 - 3.0 * b2 * b2 / 256.0;
    let scale = p.abs().max(q.abs().sqrt()).max(r.abs().sqrt()).max(f64::MIN_POSITIVE);

    let ys: Vec<f64> = if q.abs() <= 1e-14 * scale * scale.sqrt() {
        // biquadratic in w = y^2
        quadratic_real_roots(p, r, scale * scale)
            .into_iter()
            .filter(|&w| w >= -1e-14 * scale)
            .flat_map(|w| {
                let s = w.max(0.0).sqrt();
                [s, -s]
            })
            .collect()
    } else {
        // resolvent 8m^3 + 8p m^2 + (2p^2 - 8r) m - q^2 = 0, need m > 0
        let resolvent = cardano_real_roots(8.0, 8.0 * p, 2.0 * p * p - 8.0 * r, -q * q)?;
        let Some(m) = resolvent.into_iter().filter(|&m| m > 0.0).reduce(f64::max) else {
            log::debug!("degenerate resolvent cubic; using isolation");
            return isolation_fallback(a, b, c, d, e);
        };
        let s = (2.0 * m).sqrt();
        let t = q / (2.0 * s);
        let mut ys = quadratic_real_roots(-s, 0.5 * p + m + t, scale * scale);
        ys.extend(quadratic_real_roots(s, 0.5 * p + m - t, scale * scale));
        ys
    };
    let desc = [1.0, bb, cc, dd, ee];
    Ok(QuarticRoots {
        roots: sorted_distinct(ys.into_iter().map(|y| polish(&desc, y - shift)).collect()),
        used_isolation_fallback: false,
    })
}
