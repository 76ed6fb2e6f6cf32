//! Locating every positive solution of the alternating system.
//!
//! The second equation determines `l = y(x)` uniquely, so the system reduces
//! to one equation in `x`. When `n = k - m - r >= 2` the non-diagonal
//! solutions are the zeros of `Q(x) = g(x, y(x))`; otherwise only the
//! diagonal exists and the log form
//! `Φ(x) = ln x + m ln(1 + λx) + (k - m) ln(1 + λy(x))` is scanned instead.
//! Both are scanned on a geometric grid; sign changes are bisected and local
//! minima of `|·|` are examined for tangencies and close root pairs.

use log::{debug, warn};
use serde::Serialize;

use crate::error::{Error, Result};

use super::{g_partials, max_residual, ti_solve, y_given_x_unchecked, FieldPair, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    pub grid_points: usize,
    /// Left end of the scan grid.
    pub x_min: f64,
    /// `|h - l|` below this is classified translation-invariant.
    pub ti_threshold: f64,
    /// Max-norm radius under which two solutions are the same.
    pub dedup_radius: f64,
    /// A local minimum of `|Q|` below this is a double root.
    pub tangency_tol: f64,
    pub residual_bound: f64,
    /// Relative bisection width for roots in `x`.
    pub root_tol: f64,
    pub inner_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            grid_points: 10_000,
            x_min: 1e-14,
            ti_threshold: 1e-8,
            dedup_radius: 1e-9,
            tangency_tol: 1e-9,
            residual_bound: 1e-8,
            root_tol: 1e-15,
            inner_tol: 1e-15,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SolutionClass {
    #[serde(rename = "TI")]
    Ti,
    #[serde(rename = "AGM")]
    Agm,
}

impl SolutionClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolutionClass::Ti => "TI",
            SolutionClass::Agm => "AGM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Solution {
    pub pair: FieldPair,
    pub class: SolutionClass,
    /// 1 for a simple root, 2 for a tangency, 3 when two branches meet the
    /// diagonal.
    pub multiplicity: u32,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionSet {
    pub params: ModelParams,
    pub lambda: f64,
    pub residual_bound: f64,
    solutions: Vec<Solution>,
}

impl SolutionSet {
    /// Sorted by `h`, largest first.
    pub fn solutions(&self) -> &[Solution] {
        &self.solutions
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn ti(&self) -> &Solution {
        self.solutions
            .iter()
            .find(|s| s.class == SolutionClass::Ti)
            .expect("a solution set always holds the TI pair")
    }

    pub fn agm(&self) -> impl Iterator<Item = &Solution> {
        self.solutions.iter().filter(|s| s.class == SolutionClass::Agm)
    }

    pub fn has_multiple_root(&self) -> bool {
        self.solutions.iter().any(|s| s.multiplicity > 1)
    }
}

/// The geometric scan grid, `x_min` to 1 inclusive.
pub fn scan_grid(opts: &SolveOptions) -> Vec<f64> {
    let n = opts.grid_points.max(2);
    let lo = opts.x_min.ln();
    (0..n)
        .map(|i| {
            if i + 1 == n {
                1.0
            } else {
                (lo * (1.0 - i as f64 / (n - 1) as f64)).exp()
            }
        })
        .collect()
}

struct Reduced<'a> {
    p: &'a ModelParams,
    inner_tol: f64,
}

impl Reduced<'_> {
    fn y(&self, x: f64) -> f64 {
        y_given_x_unchecked(self.p, x, self.inner_tol)
    }

    /// `dy/dx` along the curve defined by the second equation.
    fn dy(&self, x: f64, y: f64) -> f64 {
        let (k, r, lam) = (self.p.k() as f64, self.p.r() as f64, self.p.lambda());
        -(k - r) * lam * y * (1.0 + lam * y) / ((1.0 + lam * x) * (1.0 + (r + 1.0) * lam * y))
    }

    fn off_diagonal(&self) -> bool {
        self.p.gap() >= 2
    }

    fn value(&self, x: f64) -> f64 {
        self.value_and_slope(x).0
    }

    fn value_and_slope(&self, x: f64) -> (f64, f64) {
        let y = self.y(x);
        let dy = self.dy(x, y);
        let lam = self.p.lambda();
        if self.off_diagonal() {
            let (g, gx, gy) = g_partials(self.p.gap() as u32, lam, x, y);
            (g, gx + gy * dy)
        } else {
            let (k, m) = (self.p.k() as f64, self.p.m() as f64);
            let v = x.ln() + m * (lam * x).ln_1p() + (k - m) * (lam * y).ln_1p();
            let s = 1.0 / x + m * lam / (1.0 + lam * x) + (k - m) * lam * dy / (1.0 + lam * y);
            (v, s)
        }
    }

    fn slope(&self, x: f64) -> f64 {
        self.value_and_slope(x).1
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * hi || mid <= lo || mid >= hi {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    x: f64,
    multiplicity: u32,
}

fn scan(red: &Reduced<'_>, opts: &SolveOptions) -> Vec<Candidate> {
    let xs = scan_grid(opts);
    let qs: Vec<f64> = xs.iter().map(|&x| red.value(x)).collect();
    let tol = opts.root_tol;
    let mut out = Vec::new();
    for i in 0..xs.len() {
        if qs[i] == 0.0 {
            out.push(Candidate { x: xs[i], multiplicity: 1 });
            continue;
        }
        if i + 1 < xs.len() && qs[i + 1] != 0.0 && (qs[i] < 0.0) != (qs[i + 1] < 0.0) {
            let x = bisect(|x| red.value(x), xs[i], xs[i + 1], tol);
            out.push(Candidate { x, multiplicity: 1 });
        }
        if i == 0 || i + 1 == xs.len() {
            continue;
        }
        let (a, b, c) = (qs[i - 1], qs[i], qs[i + 1]);
        let same_sign = (a < 0.0) == (b < 0.0) && (b < 0.0) == (c < 0.0) && a != 0.0 && c != 0.0;
        if !(same_sign && b.abs() <= a.abs() && b.abs() <= c.abs()) {
            continue;
        }
        let (sl, sr) = (red.slope(xs[i - 1]), red.slope(xs[i + 1]));
        if (sl < 0.0) == (sr < 0.0) {
            continue;
        }
        let x0 = bisect(|x| red.slope(x), xs[i - 1], xs[i + 1], tol);
        let q0 = red.value(x0);
        debug!("local extremum of the reduced equation at x={x0}, value {q0}");
        if q0.abs() < opts.tangency_tol {
            out.push(Candidate { x: x0, multiplicity: 2 });
        } else if (q0 < 0.0) != (b < 0.0) {
            out.push(Candidate { x: bisect(|x| red.value(x), xs[i - 1], x0, tol), multiplicity: 1 });
            out.push(Candidate { x: bisect(|x| red.value(x), x0, xs[i + 1], tol), multiplicity: 1 });
        }
    }
    out
}

/// [`solve_all_with`] using default options and root tolerance `tol`.
pub fn solve_all(p: &ModelParams, tol: f64) -> Result<SolutionSet> {
    let opts = SolveOptions {
        root_tol: tol.min(SolveOptions::default().root_tol).max(f64::EPSILON),
        ..SolveOptions::default()
    };
    solve_all_with(p, &opts)
}

pub fn solve_all_with(p: &ModelParams, opts: &SolveOptions) -> Result<SolutionSet> {
    let red = Reduced { p, inner_tol: opts.inner_tol };
    let (k, lam) = (p.k(), p.lambda());
    let z = ti_solve(k, lam, opts.inner_tol)?;
    let mut ti = Solution {
        pair: FieldPair::new(z, z)?,
        class: SolutionClass::Ti,
        multiplicity: 1,
        residual: max_residual(p, &FieldPair { h: z, l: z }),
    };
    if red.off_diagonal() {
        let (gzz, _, _) = g_partials(p.gap() as u32, lam, z, z);
        if gzz.abs() < opts.tangency_tol {
            ti.multiplicity = if p.m() == p.r() { 3 } else { 2 };
        }
    }

    let candidates = scan(&red, opts);
    let mut found_ti = red.off_diagonal();
    let mut agm: Vec<Solution> = Vec::new();
    for c in candidates {
        let pair = FieldPair { h: c.x, l: red.y(c.x) };
        if !(pair.l > 0.0) {
            continue;
        }
        if (pair.h - pair.l).abs() < opts.ti_threshold {
            if red.off_diagonal() {
                ti.multiplicity = ti.multiplicity.max(if c.multiplicity > 1 { 3 } else { 2 });
            }
            found_ti = true;
            continue;
        }
        if !red.off_diagonal() {
            return Err(Error::Numerical(format!(
                "non-diagonal root at x={} with n={} <= 1",
                c.x,
                p.gap()
            )));
        }
        let residual = max_residual(p, &pair);
        if residual > opts.residual_bound {
            warn!("dropping candidate {pair} with residual {residual:e}");
            continue;
        }
        agm.push(Solution { pair, class: SolutionClass::Agm, multiplicity: c.multiplicity, residual });
    }
    if !found_ti {
        return Err(Error::Numerical(format!(
            "scan did not locate the translation-invariant root near {z} (k={k}, λ={lam})"
        )));
    }

    if p.m() == p.r() {
        let partners: Vec<Solution> = agm
            .iter()
            .map(|s| Solution {
                pair: s.pair.swapped(),
                residual: max_residual(p, &s.pair.swapped()),
                ..*s
            })
            .collect();
        agm.extend(partners);
    }

    let mut solutions = vec![ti];
    agm.sort_by(|a, b| b.multiplicity.cmp(&a.multiplicity));
    for s in agm {
        if solutions.iter().all(|t| t.pair.max_distance(&s.pair) >= opts.dedup_radius) {
            solutions.push(s);
        }
    }
    solutions.sort_by(|a, b| b.pair.h.total_cmp(&a.pair.h));
    Ok(SolutionSet { params: *p, lambda: lam, residual_bound: opts.residual_bound, solutions })
}
