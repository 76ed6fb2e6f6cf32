//! Critical activities: closed forms, the `ψ` minimisation for
//! `(k, m, r) = (4, 1, 0)`, and a generic solution-count bisection.

use log::{info, warn};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{solve_all, ModelParams, SolutionSet};
use crate::polyroot::cardano_real_roots;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalMethod {
    ClosedForm,
    PsiMinimization,
    CountBisection,
}

impl CriticalMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CriticalMethod::ClosedForm => "closed-form",
            CriticalMethod::PsiMinimization => "psi-minimization",
            CriticalMethod::CountBisection => "count-bisection",
        }
    }
}

/// How the extra solutions appear when `λ` crosses the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieConvention {
    /// A tangency away from the diagonal: at `λ_cr` itself a double root is
    /// already present, so the threshold belongs to the multi-solution side.
    DoubleRootAtCritical,
    /// Two branches leave the diagonal: at `λ_cr` only the TI pair exists.
    MergeIntoTi,
}

impl TieConvention {
    pub fn as_str(&self) -> &'static str {
        match self {
            TieConvention::DoubleRootAtCritical => "double-root-at-critical",
            TieConvention::MergeIntoTi => "merge-into-ti",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalReport {
    pub lambda_cr: f64,
    pub method: CriticalMethod,
    pub bracket: (f64, f64),
    /// Sampled `(λ, number of solutions)`, ascending in `λ`.
    pub solution_counts: Vec<(f64, usize)>,
    pub convention: Option<TieConvention>,
}

fn count_at(k: u32, m: u32, r: u32, lambda: f64) -> Result<SolutionSet> {
    solve_all(&ModelParams::new(k, lambda, m, r)?, 1e-15)
}

fn sorted_counts(mut v: Vec<(f64, usize)>) -> Vec<(f64, usize)> {
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v.dedup_by(|a, b| a.0 == b.0);
    v
}

/// `((k - 2m)/(k - 2m - 1))^k / (k - 2m - 1)`, the threshold for `m = r`.
pub fn lambda_cr_closed_equal_mr(k: u32, m: u32) -> Result<f64> {
    if 2 * m + 2 > k {
        return Err(Error::Domain(format!(
            "closed form needs 2m <= k - 2, got k={k}, m={m}"
        )));
    }
    let a = (k - 2 * m) as f64;
    let b = a - 1.0;
    Ok((a / b).powi(k as i32) / b)
}

fn check_u(u: f64) -> Result<()> {
    if u > 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("ψ is defined for u > 0, got {u}")))
    }
}

fn psi_denominator(u: f64) -> (f64, f64) {
    let s2 = u.powi(4) + 6.0 * u.powi(3) + 9.0 * u * u + 4.0 * u;
    let s = s2.sqrt();
    let ds = (4.0 * u.powi(3) + 18.0 * u * u + 18.0 * u + 4.0) / (2.0 * s);
    (s + u * u + 3.0 * u, ds + 2.0 * u + 3.0)
}

/// `ψ(u) = ((u+1)^4 / 2u)(√(u^4 + 6u^3 + 9u^2 + 4u) - u^2 - 3u)`, evaluated
/// as `2(u+1)^4 / (√(…) + u^2 + 3u)` to avoid cancellation.
pub fn psi(u: f64) -> Result<f64> {
    check_u(u)?;
    let (d, _) = psi_denominator(u);
    Ok(2.0 * (u + 1.0).powi(4) / d)
}

/// `dψ/du`.
pub fn psi_prime(u: f64) -> Result<f64> {
    check_u(u)?;
    let (d, dd) = psi_denominator(u);
    let a = (u + 1.0).powi(3);
    Ok(2.0 * a * (4.0 * d - (u + 1.0) * dd) / (d * d))
}

/// Central-difference check that `ψ'' > 0` on `n` points of `[lo, hi]`.
pub fn psi_convex_on_grid(lo: f64, hi: f64, n: usize) -> Result<bool> {
    check_u(lo)?;
    let h = 1e-5 * lo.min(1.0);
    for i in 0..n {
        let u = lo + (hi - lo) * i as f64 / (n.max(2) - 1) as f64;
        let second = (psi_prime(u + h)? - psi_prime((u - h).max(lo * 0.5))?) / (u + h - (u - h).max(lo * 0.5));
        if !(second > 0.0) {
            warn!("ψ'' = {second} at u = {u}");
            return Ok(false);
        }
    }
    Ok(true)
}

/// `(√91 - 9)/5`: critical points of `ψ` below this are not admissible.
pub fn psi_admissible_threshold() -> f64 {
    (91f64.sqrt() - 9.0) / 5.0
}

/// `λ_cr` for `(k, m, r) = (4, 1, 0)` as the minimum of `ψ`.
///
/// The critical points are the roots of `10u^3 + 41u^2 - 16u + 1`; the one
/// above the admissibility threshold is the minimiser.
pub fn lambda_cr_k4_m1_r0() -> Result<(CriticalReport, f64)> {
    let roots = cardano_real_roots(10.0, 41.0, -16.0, 1.0)?;
    let threshold = psi_admissible_threshold();
    let u_star = roots
        .iter()
        .copied()
        .filter(|&u| u > threshold)
        .fold(None, |acc: Option<f64>, u| Some(acc.map_or(u, |a| a.max(u))))
        .ok_or_else(|| Error::Numerical("no admissible critical point of ψ".into()))?;
    info!("ψ critical points {roots:?}, threshold {threshold}, selected {u_star}");
    if !psi_convex_on_grid(threshold, 10.0, 2000)? {
        warn!("ψ is not convex on the sampled grid");
    }
    let lambda_cr = psi(u_star)?;
    let bracket = (lambda_cr * (1.0 - 1e-6), lambda_cr * (1.0 + 1e-6));
    let mut counts = Vec::new();
    for lam in [bracket.0, lambda_cr, bracket.1] {
        counts.push((lam, count_at(4, 1, 0, lam)?.len()));
    }
    info!("solution counts around ψ(u*): {counts:?}");
    Ok((
        CriticalReport {
            lambda_cr,
            method: CriticalMethod::PsiMinimization,
            bracket,
            solution_counts: sorted_counts(counts),
            convention: Some(TieConvention::DoubleRootAtCritical),
        },
        u_star,
    ))
}

/// `(C(k, m+1), 2^k)`.
pub fn binomial_bracket(k: u32, m: u32) -> Result<(f64, f64)> {
    if m + 2 > k {
        return Err(Error::InvalidParameter(format!("need m <= k - 2, got k={k}, m={m}")));
    }
    let c = (0..=m).fold(1u128, |acc, i| acc * (k - i) as u128 / (i + 1) as u128);
    Ok((c as f64, 2f64.powi(k as i32)))
}

/// Bracket used by [`lambda_cr_numeric`] when none is supplied.
pub fn default_bracket(k: u32, m: u32, r: u32) -> (f64, f64) {
    if m + r + 2 == k {
        let (lo, hi) = binomial_bracket(k, m).expect("m <= k - 2");
        (lo * (1.0 - 1e-6), hi * (1.0 + 1e-6))
    } else {
        (1e-3, 2f64.powi(k as i32))
    }
}

fn convention_of(set: &SolutionSet) -> TieConvention {
    let ti = set.ti().pair;
    let agm: Vec<_> = set.agm().map(|s| s.pair).collect();
    if agm.len() >= 2 {
        let spread = agm[0].max_distance(&agm[1]);
        let to_ti = agm.iter().map(|a| a.max_distance(&ti)).fold(f64::INFINITY, f64::min);
        if to_ti < spread {
            return TieConvention::MergeIntoTi;
        }
    }
    TieConvention::DoubleRootAtCritical
}

/// Bisects `λ` on the boundary between one solution and several.
///
/// A detected double root counts as several solutions. When the new branches
/// leave the diagonal the lower end of the final bracket is reported,
/// otherwise the upper end.
pub fn lambda_cr_numeric(
    k: u32,
    m: u32,
    r: u32,
    bracket: Option<(f64, f64)>,
    tol: f64,
) -> Result<CriticalReport> {
    let (mut lo, mut hi) = bracket.unwrap_or_else(|| default_bracket(k, m, r));
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::InvalidParameter(format!("bad bracket ({lo}, {hi})")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let bracket0 = (lo, hi);
    let mut counts = Vec::new();
    let n_lo = count_at(k, m, r, lo)?.len();
    let mut hi_set = count_at(k, m, r, hi)?;
    counts.push((lo, n_lo));
    counts.push((hi, hi_set.len()));
    if n_lo >= 2 || hi_set.len() < 2 {
        let count = if n_lo == hi_set.len() { n_lo } else { n_lo.min(hi_set.len()) };
        return Err(Error::NoTransition { lo, hi, count });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let set = count_at(k, m, r, mid)?;
        counts.push((mid, set.len()));
        if set.len() >= 2 {
            hi = mid;
            hi_set = set;
        } else {
            lo = mid;
        }
    }
    let convention = convention_of(&hi_set);
    let lambda_cr = match convention {
        TieConvention::MergeIntoTi => lo,
        TieConvention::DoubleRootAtCritical => hi,
    };
    let counts = sorted_counts(counts);
    info!(
        "count bisection k={k} m={m} r={r}: λ_cr={lambda_cr} ({}), grid {counts:?}",
        convention.as_str()
    );
    Ok(CriticalReport {
        lambda_cr,
        method: CriticalMethod::CountBisection,
        bracket: bracket0,
        solution_counts: counts,
        convention: Some(convention),
    })
}

/// The closed form when `m = r`, count bisection otherwise; `(4, 1, 0)`
/// goes through `ψ`.
pub fn lambda_cr(k: u32, m: u32, r: u32, tol: f64) -> Result<CriticalReport> {
    if (k, m, r) == (4, 1, 0) {
        return Ok(lambda_cr_k4_m1_r0()?.0);
    }
    if m == r && 2 * m + 2 <= k {
        let lambda_cr = lambda_cr_closed_equal_mr(k, m)?;
        let bracket = (lambda_cr * (1.0 - 1e-6), lambda_cr * (1.0 + 1e-6));
        let mut counts = Vec::new();
        for lam in [bracket.0, lambda_cr, bracket.1] {
            counts.push((lam, count_at(k, m, r, lam)?.len()));
        }
        return Ok(CriticalReport {
            lambda_cr,
            method: CriticalMethod::ClosedForm,
            bracket,
            solution_counts: sorted_counts(counts),
            convention: Some(TieConvention::MergeIntoTi),
        });
    }
    lambda_cr_numeric(k, m, r, None, tol)
}
