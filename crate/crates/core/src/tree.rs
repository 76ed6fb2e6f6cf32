//! Finite half-trees, `(m, r)` labellings, admissible configurations and the
//! exact finite-volume measures built from a boundary law.
//!
//! Vertices are indexed breadth-first: the root is 0 and the children of `v`
//! are `k v + 1 ..= k v + k`, so `V_j` is always an index prefix.

use std::collections::BTreeMap;
use std::io::{self, Write};

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{max_residual, FieldPair, ModelParams};

pub const DEFAULT_VERTEX_CAP: u128 = 1_000_000;
pub const FULL_ENUMERATION_CAP: usize = 25;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteHalfTree {
    k: u32,
    depth: u32,
    /// `level_start[j]` is the index of the first vertex of `W_j`; one extra
    /// entry holds the total.
    level_start: Vec<usize>,
}

fn vertices_up_to(k: u32, depth: u32) -> Option<u128> {
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..=depth {
        total = total.checked_add(level)?;
        level = level.checked_mul(k as u128)?;
    }
    Some(total)
}

pub fn build_half_tree(k: u32, depth: u32) -> Result<FiniteHalfTree> {
    build_half_tree_capped(k, depth, DEFAULT_VERTEX_CAP)
}

pub fn build_half_tree_capped(k: u32, depth: u32, cap: u128) -> Result<FiniteHalfTree> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("order k must be >= 2, got {k}")));
    }
    let needed = vertices_up_to(k, depth).unwrap_or(u128::MAX);
    if needed > cap {
        return Err(Error::SizeCap { what: "half-tree vertices", needed, cap });
    }
    let mut level_start = vec![0usize];
    let mut size = 1usize;
    for _ in 0..=depth {
        let last = *level_start.last().unwrap();
        level_start.push(last + size);
        size *= k as usize;
    }
    Ok(FiniteHalfTree { k, depth, level_start })
}

impl FiniteHalfTree {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        *self.level_start.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        (v > 0).then(|| (v - 1) / self.k as usize)
    }

    /// Empty for leaves.
    pub fn children(&self, v: usize) -> std::ops::Range<usize> {
        let k = self.k as usize;
        if self.level(v) == self.depth {
            return 0..0;
        }
        k * v + 1..k * v + k + 1
    }

    pub fn level(&self, v: usize) -> u32 {
        self.level_start.partition_point(|&s| s <= v) as u32 - 1
    }

    /// Index range of `W_j`.
    pub fn level_range(&self, j: u32) -> std::ops::Range<usize> {
        self.level_start[j as usize]..self.level_start[j as usize + 1]
    }

    pub fn leaves(&self) -> std::ops::Range<usize> {
        self.level_range(self.depth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Label {
    H,
    L,
}

impl Label {
    pub fn other(self) -> Self {
        match self {
            Label::H => Label::L,
            Label::L => Label::H,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Label::H => "h",
            Label::L => "l",
        }
    }
}

/// Which children inherit the parent's label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChildOrder {
    #[default]
    First,
    Last,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldAssignment {
    pub labels: Vec<Label>,
    pub values: FieldPair,
    pub m: u32,
    pub r: u32,
}

impl FieldAssignment {
    pub fn value(&self, v: usize) -> f64 {
        match self.labels[v] {
            Label::H => self.values.h,
            Label::L => self.values.l,
        }
    }
}

/// An `h` vertex passes `h` to its first `m` children and `l` to the rest;
/// an `l` vertex passes `l` to its first `r` children and `h` to the rest.
pub fn assign_field(
    t: &FiniteHalfTree,
    m: u32,
    r: u32,
    root: Label,
    values: FieldPair,
) -> Result<FieldAssignment> {
    assign_field_ordered(t, m, r, root, values, ChildOrder::First)
}

pub fn assign_field_ordered(
    t: &FiniteHalfTree,
    m: u32,
    r: u32,
    root: Label,
    values: FieldPair,
    order: ChildOrder,
) -> Result<FieldAssignment> {
    let k = t.k();
    if m > k || r > k {
        return Err(Error::InvalidParameter(format!(
            "scheme counts must satisfy m, r <= k; got m={m}, r={r}, k={k}"
        )));
    }
    let mut labels = vec![root; t.len()];
    for v in 0..t.len() {
        let own = labels[v];
        let keep = if own == Label::H { m } else { r } as usize;
        for (i, c) in t.children(v).enumerate() {
            let inherits = match order {
                ChildOrder::First => i < keep,
                ChildOrder::Last => i >= k as usize - keep,
            };
            labels[c] = if inherits { own } else { own.other() };
        }
    }
    Ok(FieldAssignment { labels, values, m, r })
}

/// `(α_j, β_j)` for `j = 0..=depth`: the number of `h` and `l` vertices in `W_j`.
pub fn level_counts(t: &FiniteHalfTree, f: &FieldAssignment) -> Vec<(u128, u128)> {
    (0..=t.depth())
        .map(|j| {
            let h = t.level_range(j).filter(|&v| f.labels[v] == Label::H).count() as u128;
            (h, t.level_range(j).len() as u128 - h)
        })
        .collect()
}

/// The same counts from `α' = mα + (k-r)β`, `β' = (k-m)α + rβ` without
/// materialising the tree.
pub fn level_counts_recurrence(k: u32, m: u32, r: u32, root: Label, depth: u32) -> Result<Vec<(u128, u128)>> {
    if m > k || r > k {
        return Err(Error::InvalidParameter(format!("need m, r <= k; got m={m}, r={r}, k={k}")));
    }
    let (m, r, k) = (m as u128, r as u128, k as u128);
    let mut cur = match root {
        Label::H => (1u128, 0u128),
        Label::L => (0, 1),
    };
    let overflow = || Error::SizeCap { what: "level count", needed: u128::MAX, cap: u128::MAX };
    let mut out = vec![cur];
    for _ in 0..depth {
        let (a, b) = cur;
        let a2 = m.checked_mul(a).and_then(|x| (k - r).checked_mul(b).and_then(|y| x.checked_add(y)));
        let b2 = (k - m).checked_mul(a).and_then(|x| r.checked_mul(b).and_then(|y| x.checked_add(y)));
        cur = (a2.ok_or_else(overflow)?, b2.ok_or_else(overflow)?);
        out.push(cur);
    }
    Ok(out)
}

/// Number of admissible configurations on `V_n`, by a leaf-to-root pass.
pub fn count_admissible(t: &FiniteHalfTree) -> BigUint {
    // (empty, occupied) counts per vertex
    let mut counts: Vec<(BigUint, BigUint)> = vec![(BigUint::one(), BigUint::one()); t.len()];
    for v in (0..t.len()).rev() {
        let mut empty = BigUint::one();
        let mut occupied = BigUint::one();
        for c in t.children(v) {
            let (e, o) = &counts[c];
            empty *= e + o;
            occupied *= e;
        }
        counts[v] = (empty, occupied);
    }
    let (e, o) = &counts[0];
    e + o
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        c += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + c
}

fn check_enumerable(t: &FiniteHalfTree) -> Result<()> {
    if t.len() > FULL_ENUMERATION_CAP {
        return Err(Error::SizeCap {
            what: "full enumeration vertices",
            needed: t.len() as u128,
            cap: FULL_ENUMERATION_CAP as u128,
        });
    }
    Ok(())
}

/// All admissible configurations as bitmasks (bit `v` set when `v` is
/// occupied), in increasing order.
pub fn enumerate_admissible(t: &FiniteHalfTree) -> Result<Vec<u32>> {
    check_enumerable(t)?;
    let n = t.len();
    let mut out = Vec::new();
    let mut stack = vec![(0usize, 0u32)];
    while let Some((v, mask)) = stack.pop() {
        if v == n {
            out.push(mask);
            continue;
        }
        stack.push((v + 1, mask));
        let free = t.parent(v).is_none_or(|p| mask & (1 << p) == 0);
        if free {
            stack.push((v + 1, mask | (1 << v)));
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// `μ(σ) ∝ λ^{#σ} Π_{x ∈ W_n} z_{σ(x), x}` with `z_{0,x} = 1`,
/// `z_{1,x} = z_x`; occupied leaves therefore weigh `λ z_x`.
pub fn measure_table(t: &FiniteHalfTree, lambda: f64, f: &FieldAssignment) -> Result<BTreeMap<u32, f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("activity must be positive, got {lambda}")));
    }
    if f.labels.len() != t.len() {
        return Err(Error::InvalidParameter("assignment does not match the tree".into()));
    }
    let configs = enumerate_admissible(t)?;
    let leaves = t.leaves();
    let weights: Vec<f64> = configs
        .iter()
        .map(|&mask| {
            let mut w = lambda.powi(mask.count_ones() as i32);
            for x in leaves.clone() {
                if mask & (1 << x) != 0 {
                    w *= f.value(x);
                }
            }
            w
        })
        .collect();
    let z = compensated_sum(weights.iter().copied());
    Ok(configs.into_iter().zip(weights).map(|(c, w)| (c, w / z)).collect())
}

/// Partition function of [`measure_table`] without normalising.
pub fn partition_function(t: &FiniteHalfTree, lambda: f64, f: &FieldAssignment) -> Result<f64> {
    let configs = enumerate_admissible(t)?;
    let leaves = t.leaves();
    Ok(compensated_sum(configs.iter().map(|&mask| {
            let mut w = lambda.powi(mask.count_ones() as i32);
            for x in leaves.clone() {
                if mask & (1 << x) != 0 {
                    w *= f.value(x);
                }
            }
            w
        })))
}

/// Largest deviation between the marginal of `μ^(n)` on `V_{n-1}` and
/// `μ^(n-1)`, for the `(m, r)` labelling rooted at `h`. No check that the
/// pair solves the system.
pub fn consistency_residual(k: u32, depth: u32, lambda: f64, m: u32, r: u32, f: FieldPair) -> Result<f64> {
    if depth < 1 {
        return Err(Error::InvalidParameter("consistency needs depth >= 1".into()));
    }
    let big = build_half_tree(k, depth)?;
    let small = build_half_tree(k, depth - 1)?;
    let fb = assign_field(&big, m, r, Label::H, f)?;
    let fs = assign_field(&small, m, r, Label::H, f)?;
    let mu_big = measure_table(&big, lambda, &fb)?;
    let mu_small = measure_table(&small, lambda, &fs)?;
    let keep = (1u32 << small.len()) - 1;
    let mut marginal: BTreeMap<u32, f64> = BTreeMap::new();
    for (c, p) in mu_big {
        *marginal.entry(c & keep).or_insert(0.0) += p;
    }
    let mut worst: f64 = 0.0;
    for (c, p) in &mu_small {
        worst = worst.max((marginal.get(c).copied().unwrap_or(0.0) - p).abs());
    }
    for (c, p) in &marginal {
        if !mu_small.contains_key(c) {
            worst = worst.max(p.abs());
        }
    }
    Ok(worst)
}

/// [`consistency_residual`] after checking that `f` solves the system to `tol`.
pub fn check_consistency(k: u32, depth: u32, lambda: f64, m: u32, r: u32, f: FieldPair, tol: f64) -> Result<f64> {
    let p = ModelParams::new(k, lambda, m, r)?;
    let res = max_residual(&p, &f);
    if res > tol {
        return Err(Error::Precondition(format!(
            "{f} does not solve the system: residual {res:e} > {tol:e}"
        )));
    }
    consistency_residual(k, depth, lambda, m, r, f)
}

/// CSV with columns `vertex,level,label,value`.
pub fn write_field_csv<W: Write>(mut w: W, t: &FiniteHalfTree, f: &FieldAssignment) -> io::Result<()> {
    writeln!(w, "vertex,level,label,value")?;
    for v in 0..t.len() {
        writeln!(w, "{},{},{},{}", v, t.level(v), f.labels[v].as_str(), f.value(v))?;
    }
    Ok(())
}

/// CSV with columns `config,probability`; `config` is the occupation bitmask.
pub fn write_measure_csv<W: Write>(mut w: W, table: &BTreeMap<u32, f64>) -> io::Result<()> {
    writeln!(w, "config,probability")?;
    for (c, p) in table {
        writeln!(w, "{c},{p}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{solve_all, ti_solve};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn pair(h: f64, l: f64) -> FieldPair {
        FieldPair::new(h, l).unwrap()
    }

    #[test]
    fn sizes() {
        assert_eq!(build_half_tree(2, 1).unwrap().len(), 3);
        assert_eq!(build_half_tree(4, 2).unwrap().len(), 21);
        let t = build_half_tree(5, 2).unwrap();
        assert_eq!(t.len(), 31);
        assert_eq!(t.level_range(2).len(), 25);
        assert_eq!(t.level(0), 0);
        assert_eq!(t.level(5), 1);
        assert_eq!(t.level(6), 2);
        assert_eq!(t.children(1), 6..11);
        assert_eq!(t.parent(7), Some(1));
        assert!(t.children(30).is_empty());
        assert!(matches!(build_half_tree(10, 7), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn labelling_rules() {
        let t = build_half_tree(5, 2).unwrap();
        let f = assign_field(&t, 3, 2, Label::H, pair(0.5, 0.2)).unwrap();
        use Label::*;
        assert_eq!(&f.labels[1..6], &[H, H, H, L, L]);
        let mut lv1: Vec<_> = f.labels[1..6].to_vec();
        lv1.sort();
        assert_eq!(lv1, vec![H, H, H, L, L]);

        let f = assign_field(&t, 5, 1, Label::H, pair(0.5, 0.2)).unwrap();
        assert!(f.labels.iter().all(|&l| l == H));

        let f = assign_field(&t, 0, 0, Label::H, pair(0.5, 0.2)).unwrap();
        for v in 0..t.len() {
            let expected = if t.level(v) % 2 == 0 { H } else { L };
            assert_eq!(f.labels[v], expected);
        }
    }

    #[test]
    fn counts_for_the_five_three_two_scheme() {
        let t = build_half_tree(5, 2).unwrap();
        let f = assign_field(&t, 3, 2, Label::H, pair(0.5, 0.2)).unwrap();
        assert_eq!(level_counts(&t, &f), vec![(1, 0), (3, 2), (15, 10)]);
        let rec = level_counts_recurrence(5, 3, 2, Label::H, 12).unwrap();
        for (n, (a, b)) in rec.iter().enumerate().skip(1) {
            assert_eq!(a + b, 5u128.pow(n as u32));
            assert_eq!(5 * b, 2 * 5u128.pow(n as u32));
        }
    }

    #[test]
    fn recurrence_matches_materialised_trees() {
        for (k, m, r) in [(5, 3, 2), (4, 1, 0), (3, 1, 1), (2, 0, 0), (3, 3, 0)] {
            let depth = if k == 5 { 4 } else { 5 };
            let t = build_half_tree(k, depth).unwrap();
            for root in [Label::H, Label::L] {
                let f = assign_field(&t, m, r, root, pair(0.5, 0.2)).unwrap();
                let got = level_counts(&t, &f);
                assert_eq!(got, level_counts_recurrence(k, m, r, root, depth).unwrap());
                for (n, (a, b)) in got.iter().enumerate() {
                    assert_eq!(a + b, (k as u128).pow(n as u32));
                }
            }
        }
    }

    #[test]
    fn admissible_counts() {
        assert_eq!(count_admissible(&build_half_tree(2, 0).unwrap()), BigUint::from(2u32));
        let t = build_half_tree(2, 1).unwrap();
        assert_eq!(count_admissible(&t), BigUint::from(5u32));
        assert_eq!(enumerate_admissible(&t).unwrap(), vec![0, 1, 2, 4, 6]);
        for (k, d) in [(2, 2), (2, 3), (3, 2), (4, 2)] {
            let t = build_half_tree(k, d).unwrap();
            assert_eq!(BigUint::from(enumerate_admissible(&t).unwrap().len()), count_admissible(&t));
        }
        // k = 2, depth 2: empty root gives 5^2, occupied root gives 2^4
        assert_eq!(count_admissible(&build_half_tree(2, 2).unwrap()), BigUint::from(41u32));
        assert!(enumerate_admissible(&build_half_tree(2, 4).unwrap()).is_err());
        assert!(count_admissible(&build_half_tree(3, 8).unwrap()) > BigUint::from(u64::MAX));
    }

    #[test]
    fn small_measures() {
        let z = ti_solve(2, 1.0, 1e-16).unwrap();
        let t = build_half_tree(2, 1).unwrap();
        let f = assign_field(&t, 2, 2, Label::H, pair(z, z)).unwrap();
        let zn = partition_function(&t, 1.0, &f).unwrap();
        assert_abs_diff_eq!(zn, 1.0 + (1.0 + z).powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!(zn, 3.1478990357, epsilon = 1e-9);
        let mu = measure_table(&t, 1.0, &f).unwrap();
        assert_abs_diff_eq!(mu[&1], 1.0 / zn, epsilon = 1e-15);

        let t0 = build_half_tree(2, 0).unwrap();
        let f0 = assign_field(&t0, 2, 2, Label::H, pair(0.3, 0.3)).unwrap();
        let mu = measure_table(&t0, 1.0, &f0).unwrap();
        assert_abs_diff_eq!(mu[&1], 0.3 / 1.3, epsilon = 1e-15);

        let t = build_half_tree(3, 2).unwrap();
        let f = assign_field(&t, 1, 0, Label::H, pair(0.4, 0.1)).unwrap();
        let mu = measure_table(&t, 1e-9, &f).unwrap();
        assert!(mu[&0] > 1.0 - 1e-7);
    }

    #[test]
    fn consistency_of_solutions() {
        let z = ti_solve(2, 1.0, 1e-16).unwrap();
        assert!(check_consistency(2, 2, 1.0, 2, 2, pair(z, z), 1e-12).unwrap() < 1e-12);

        let p = ModelParams::new(3, 7.0, 1, 0).unwrap();
        let set = solve_all(&p, 1e-15).unwrap();
        assert_eq!(set.len(), 3);
        for s in set.solutions() {
            assert!(check_consistency(3, 2, 7.0, 1, 0, s.pair, 1e-10).unwrap() < 1e-10);
        }

        let bad = pair(z + 0.05, z);
        assert!(check_consistency(2, 2, 1.0, 2, 2, bad, 1e-10).is_err());
        assert!(consistency_residual(2, 2, 1.0, 2, 2, bad).unwrap() > 1e-4);
    }

    #[test]
    fn consistency_ignores_child_order() {
        let p = ModelParams::new(3, 7.0, 1, 0).unwrap();
        let s = solve_all(&p, 1e-15).unwrap();
        let a = s.agm().next().unwrap().pair;
        let t = build_half_tree(3, 2).unwrap();
        let first = assign_field_ordered(&t, 1, 0, Label::H, a, ChildOrder::First).unwrap();
        let last = assign_field_ordered(&t, 1, 0, Label::H, a, ChildOrder::Last).unwrap();
        assert_ne!(first.labels, last.labels);
        assert_eq!(level_counts(&t, &first), level_counts(&t, &last));
        let zf = partition_function(&t, 7.0, &first).unwrap();
        let zl = partition_function(&t, 7.0, &last).unwrap();
        assert_abs_diff_eq!(zf, zl, epsilon = 1e-12 * zf);
    }

    #[test]
    fn csv_output() {
        let t = build_half_tree(2, 1).unwrap();
        let f = assign_field(&t, 0, 0, Label::H, pair(0.5, 0.25)).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &t, &f).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "vertex,level,label,value\n0,0,h,0.5\n1,1,l,0.25\n2,1,l,0.25\n"
        );
        let mu = measure_table(&t, 1.0, &f).unwrap();
        let mut buf = Vec::new();
        write_measure_csv(&mut buf, &mu).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("config,probability\n0,"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn measures_are_normalised(
            k in 2u32..5, depth in 0u32..3, lam in 0.01f64..50.0,
            h in 0.001f64..1.0, l in 0.001f64..1.0, m in 0u32..5, r in 0u32..5,
        ) {
            prop_assume!(m <= k && r <= k);
            let t = build_half_tree(k, depth).unwrap();
            prop_assume!(t.len() <= FULL_ENUMERATION_CAP);
            let f = assign_field(&t, m, r, Label::H, pair(h, l)).unwrap();
            let total = compensated_sum(measure_table(&t, lam, &f).unwrap().into_values());
            prop_assert!((total - 1.0).abs() < 1e-13);
        }
    }
}
