//! Free energy of the alternating boundary condition.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::FieldPair;
use crate::tree::{level_counts_recurrence, Label};

fn denominator(k: u32, m: u32, r: u32) -> Result<u64> {
    let d = 2 * k as i64 - m as i64 - r as i64;
    if d <= 0 || m > k || r > k {
        return Err(Error::Domain(format!(
            "need 2k - m - r > 0 with m, r <= k; got k={k}, m={m}, r={r}"
        )));
    }
    Ok(d as u64)
}

/// Limiting shares of `h` and `l` vertices in a sphere, scaled by
/// `(k-1)/k`: `((k-1)(k-r), (k-1)(k-m)) / (k(2k-m-r))`.
pub fn stationary_fractions(k: u32, m: u32, r: u32) -> Result<(f64, f64)> {
    let d = denominator(k, m, r)? as f64;
    let k_ = k as f64;
    let scale = (k_ - 1.0) / (k_ * d);
    Ok((scale * (k - r) as f64, scale * (k - m) as f64))
}

/// `((k-1) α_n / (k^{n+1} - 1), (k-1) β_n / (k^{n+1} - 1))` for the labelling
/// rooted at `h`, from the exact counts.
pub fn level_fractions(k: u32, m: u32, r: u32, depth: u32) -> Result<(f64, f64)> {
    let counts = level_counts_recurrence(k, m, r, Label::H, depth)?;
    let (a, b) = counts[depth as usize];
    let ball = (k as f64).powi(depth as i32 + 1) - 1.0;
    let s = (k as f64 - 1.0) / ball;
    Ok((s * a as f64, s * b as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum FreeEnergyValue {
    Finite(f64),
    /// `-∞`
    Divergent,
}

impl FreeEnergyValue {
    pub fn as_f64(&self) -> f64 {
        match self {
            FreeEnergyValue::Finite(v) => *v,
            FreeEnergyValue::Divergent => f64::NEG_INFINITY,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, FreeEnergyValue::Divergent)
    }
}

/// Coefficients of `ln h`, `ln l` and the common denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FreeEnergyComponents {
    pub h_coeff: u64,
    pub l_coeff: u64,
    pub denominator: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeEnergyResult {
    pub value: FreeEnergyValue,
    pub lambda: f64,
    pub beta: f64,
    pub components: FreeEnergyComponents,
}

pub fn components(k: u32, m: u32, r: u32) -> Result<FreeEnergyComponents> {
    let d = denominator(k, m, r)?;
    let k = k as u64;
    Ok(FreeEnergyComponents {
        h_coeff: (k - 1) * (k - r as u64),
        // k^2 - (m+1)k + m
        l_coeff: k * k + m as u64 - (m as u64 + 1) * k,
        denominator: k * d,
    })
}

/// `-(1/β) [(k-1)(k-r) ln h - (k^2 - (m+1)k + m) ln l] / (k(2k-m-r))` for
/// `λ <= 1`; `-∞` for `λ > 1`.
pub fn f_alt(k: u32, m: u32, r: u32, f: FieldPair, beta: f64, lambda: f64) -> Result<FreeEnergyResult> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("β must be positive, got {beta}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("activity must be positive, got {lambda}")));
    }
    if !(f.h > 0.0 && f.l > 0.0) {
        return Err(Error::Domain(format!("logarithm of a nonpositive field value in {f}")));
    }
    let c = components(k, m, r)?;
    let value = if lambda > 1.0 {
        FreeEnergyValue::Divergent
    } else {
        let num = c.h_coeff as f64 * f.h.ln() - c.l_coeff as f64 * f.l.ln();
        FreeEnergyValue::Finite(-num / (c.denominator as f64 * beta))
    };
    Ok(FreeEnergyResult { value, lambda, beta, components: c })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FreeEnergyRegime {
    /// `λ < λ_cr`: no alternating solution.
    BelowCritical,
    /// `λ_cr <= λ <= 1`: the closed formula applies.
    Finite,
    /// `λ > 1`.
    Divergent,
}

impl FreeEnergyRegime {
    pub fn as_str(&self) -> &'static str {
        match self {
            FreeEnergyRegime::BelowCritical => "below-critical",
            FreeEnergyRegime::Finite => "finite",
            FreeEnergyRegime::Divergent => "divergent",
        }
    }
}

/// Case split on the threshold for the given activity. When `λ_cr > 1`
/// every activity with an alternating solution is divergent.
pub fn regime(lambda_cr: f64, lambda: f64) -> FreeEnergyRegime {
    if lambda > 1.0 {
        FreeEnergyRegime::Divergent
    } else if lambda < lambda_cr {
        FreeEnergyRegime::BelowCritical
    } else {
        FreeEnergyRegime::Finite
    }
}
