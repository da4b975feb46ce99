//! Subset dynamic programming for `g`.
//!
//! Every nonempty `T` satisfies
//!
//! ```text
//! g(T) = f(T) · Σ_{a ∈ T} (-1)^{|{t ∈ T : t > a}|} · g(T \ {a}),    g(∅) = 1
//! ```
//!
//! Grouping the orderings of `T` by their last element gives this identity, so
//! `g` on all of `P(N)` costs `O(n·2^n)` instead of `O(n·n!)`.
//!
//! Two engines are provided. [`g_table`] fills a dense array over all `2^n`
//! masks in increasing numeric order (a subset is numerically smaller than its
//! supersets). [`g_top`] only keeps two popcount levels, stored in colex rank
//! order, which bounds memory by `2·C(n, n/2)` entries and lets each level be
//! computed in parallel ([`g_top_parallel`]).

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_n, Error, Result};
use crate::subset::{binomials, full_mask, next_same_popcount, Binomials, BitIter, SubsetMask};
use crate::weight::{ValueClass, WeightFunction};
use crate::{sqrt_n_pow_n, MAX_N};

/// Largest `n` for the full-table engine.
pub const TABLE_LIMIT: usize = 26;
/// Largest `n` for the layered engine.
pub const TOP_LIMIT: usize = MAX_N;

/// Value of `g`: exact for `{-1,0,1}`-valued weights, otherwise a double.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum GScalar {
    Exact(i128),
    Real(f64),
}

impl GScalar {
    pub fn to_f64(self) -> f64 {
        match self {
            GScalar::Exact(v) => v as f64,
            GScalar::Real(v) => v,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, GScalar::Exact(_))
    }

    pub fn abs_diff(self, other: GScalar) -> f64 {
        match (self, other) {
            (GScalar::Exact(a), GScalar::Exact(b)) => a.abs_diff(b) as f64,
            (a, b) => (a.to_f64() - b.to_f64()).abs(),
        }
    }
}

impl fmt::Display for GScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GScalar::Exact(v) => write!(f, "{v}"),
            GScalar::Real(v) => write!(f, "{v}"),
        }
    }
}

/// Scalar arithmetic shared by both backends; `None` signals overflow.
trait Accum: Copy + Send + Sync + 'static {
    const ZERO: Self;
    const ONE: Self;
    fn weight<W: WeightFunction + ?Sized>(f: &W, s: SubsetMask) -> Self;
    fn add(self, other: Self) -> Option<Self>;
    fn sub(self, other: Self) -> Option<Self>;
    fn mul(self, other: Self) -> Option<Self>;
    fn is_zero(self) -> bool;
}

impl Accum for i128 {
    const ZERO: Self = 0;
    const ONE: Self = 1;
    #[inline]
    fn weight<W: WeightFunction + ?Sized>(f: &W, s: SubsetMask) -> Self {
        f.eval_exact(s) as i128
    }
    #[inline]
    fn add(self, other: Self) -> Option<Self> {
        self.checked_add(other)
    }
    #[inline]
    fn sub(self, other: Self) -> Option<Self> {
        self.checked_sub(other)
    }
    #[inline]
    fn mul(self, other: Self) -> Option<Self> {
        self.checked_mul(other)
    }
    #[inline]
    fn is_zero(self) -> bool {
        self == 0
    }
}

impl Accum for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    #[inline]
    fn weight<W: WeightFunction + ?Sized>(f: &W, s: SubsetMask) -> Self {
        f.eval(s)
    }
    #[inline]
    fn add(self, other: Self) -> Option<Self> {
        Some(self + other)
    }
    #[inline]
    fn sub(self, other: Self) -> Option<Self> {
        Some(self - other)
    }
    #[inline]
    fn mul(self, other: Self) -> Option<Self> {
        Some(self * other)
    }
    #[inline]
    fn is_zero(self) -> bool {
        self == 0.0
    }
}

/// `g` on every subset of `{1..n}`, indexed by mask.
#[derive(Clone, Debug, PartialEq)]
pub struct GTable {
    n: usize,
    values: GValues,
}

#[derive(Clone, Debug, PartialEq)]
enum GValues {
    Exact(Vec<i128>),
    Real(Vec<f64>),
}

impl GTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, mask: u64) -> GScalar {
        match &self.values {
            GValues::Exact(v) => GScalar::Exact(v[mask as usize]),
            GValues::Real(v) => GScalar::Real(v[mask as usize]),
        }
    }

    pub fn at(&self, t: SubsetMask) -> GScalar {
        self.get(t.bits())
    }

    /// `g(N)`.
    pub fn top(&self) -> GScalar {
        self.get(full_mask(self.n))
    }

    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.values, GValues::Exact(_))
    }
}

fn check_weight_n<W: WeightFunction + ?Sized>(f: &W, n: usize) -> Result<()> {
    if f.n() != n {
        return Err(Error::Shape(format!(
            "weight is defined on 1..={} but n = {n} was requested",
            f.n()
        )));
    }
    Ok(())
}

/// Full table of `g(T)` for all `T ⊆ {1..n}`.
pub fn g_table<W: WeightFunction + ?Sized>(f: &W, n: usize) -> Result<GTable> {
    check_n("full-table DP", n, TABLE_LIMIT)?;
    check_weight_n(f, n)?;
    let values = match f.value_class() {
        ValueClass::ExactPm01 => GValues::Exact(fill_table::<i128, W>(f, n)?),
        ValueClass::Real => GValues::Real(fill_table::<f64, W>(f, n)?),
    };
    Ok(GTable { n, values })
}

fn fill_table<A: Accum, W: WeightFunction + ?Sized>(f: &W, n: usize) -> Result<Vec<A>> {
    let size = 1usize << n;
    let mut g = vec![A::ZERO; size];
    g[0] = A::ONE;
    for mask in 1..size as u64 {
        let w = A::weight(f, SubsetMask::from_bits_unchecked(mask, n));
        if w.is_zero() {
            continue;
        }
        // walk members from the top down: the sign starts at +1 for the maximum
        // and alternates with every larger element passed
        let mut acc = A::ZERO;
        let mut positive = true;
        let mut rest = mask;
        while rest != 0 {
            let b = 63 - rest.leading_zeros() as u64;
            rest &= !(1 << b);
            let prev = g[(mask & !(1 << b)) as usize];
            acc = if positive {
                acc.add(prev)
            } else {
                acc.sub(prev)
            }
            .ok_or_else(|| overflow_of(mask))?;
            positive = !positive;
        }
        g[mask as usize] = acc.mul(w).ok_or_else(|| overflow_of(mask))?;
    }
    Ok(g)
}

#[inline]
fn overflow_of(mask: u64) -> Error {
    Error::Overflow { mask }
}

/// `g(N)` using two rolling popcount levels, sequentially.
pub fn g_top<W: WeightFunction + ?Sized>(f: &W, n: usize) -> Result<GScalar> {
    layered(f, n, false)
}

/// Same result as [`g_top`]; the entries of each level are computed on the
/// rayon pool. Entries within a level only read the previous level, so the
/// result does not depend on the schedule.
pub fn g_top_parallel<W: WeightFunction + ?Sized>(f: &W, n: usize) -> Result<GScalar> {
    layered(f, n, true)
}

fn layered<W: WeightFunction + ?Sized>(f: &W, n: usize, parallel: bool) -> Result<GScalar> {
    check_n("layered DP", n, TOP_LIMIT)?;
    check_weight_n(f, n)?;
    match f.value_class() {
        ValueClass::ExactPm01 => run_levels::<i128, W>(f, n, parallel).map(GScalar::Exact),
        ValueClass::Real => run_levels::<f64, W>(f, n, parallel).map(GScalar::Real),
    }
}

const CHUNK: usize = 1 << 12;

fn run_levels<A: Accum, W: WeightFunction + ?Sized>(f: &W, n: usize, parallel: bool) -> Result<A> {
    let binom = binomials();
    let mut prev = vec![A::ONE];
    for k in 1..=n {
        let len = binom.choose(n, k) as usize;
        let mut next = vec![A::ZERO; len];
        if parallel {
            next.par_chunks_mut(CHUNK)
                .enumerate()
                .try_for_each(|(c, out)| level_chunk(f, n, k, binom, &prev, out, c * CHUNK))?;
        } else {
            level_chunk(f, n, k, binom, &prev, &mut next, 0)?;
        }
        prev = next;
    }
    Ok(prev[0])
}

/// Fills `out` with level `k` entries starting at colex rank `start`.
fn level_chunk<A: Accum, W: WeightFunction + ?Sized>(
    f: &W,
    n: usize,
    k: usize,
    binom: &Binomials,
    prev: &[A],
    out: &mut [A],
    start: usize,
) -> Result<()> {
    let mut pos = [0usize; 64];
    let mut prefix = [0u64; 65];
    let mut mask = binom.unrank(start as u64, k);
    for (i, slot) in out.iter_mut().enumerate() {
        if i > 0 {
            mask = next_same_popcount(mask);
        }
        let w = A::weight(f, SubsetMask::from_bits_unchecked(mask, n));
        if w.is_zero() {
            *slot = A::ZERO;
            continue;
        }
        for (j, p) in BitIter(mask).enumerate() {
            pos[j] = p;
            prefix[j + 1] = prefix[j] + binom.choose(p, j + 1);
        }
        // rank(T \ {p_j}) = Σ_{i<j} C(p_i, i+1) + Σ_{i>j} C(p_i, i)
        let mut suffix = 0u64;
        let mut acc = A::ZERO;
        for j in (0..k).rev() {
            let r = (prefix[j] + suffix) as usize;
            let v = prev[r];
            // k-1-j members of T lie above p_j
            acc = if (k - 1 - j).is_multiple_of(2) {
                acc.add(v)
            } else {
                acc.sub(v)
            }
            .ok_or_else(|| overflow_of(mask))?;
            suffix += binom.choose(pos[j], j);
        }
        *slot = acc.mul(w).ok_or_else(|| overflow_of(mask))?;
    }
    Ok(())
}

/// Outcome of comparing `|g(N)|` with `√n^n`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub g_value: GScalar,
    pub bound: f64,
    pub ratio: f64,
    pub ok: bool,
}

/// Relative slack allowed on the bound comparison.
pub const BOUND_SLACK: f64 = 1e-12;

/// Evaluates `g(N)` with the layered engine and compares it with `n^{n/2}`.
pub fn bound_check<W: WeightFunction + ?Sized>(f: &W, n: usize) -> Result<BoundReport> {
    let g_value = g_top(f, n)?;
    Ok(bound_report(n, g_value))
}

pub fn bound_report(n: usize, g_value: GScalar) -> BoundReport {
    let bound = sqrt_n_pow_n(n);
    let abs = g_value.to_f64().abs();
    BoundReport {
        n,
        g_value,
        bound,
        ratio: abs / bound,
        ok: abs <= bound * (1.0 + BOUND_SLACK),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::{ConstantWeight, WeightMode, WeightTable};

    fn tight_n2() -> WeightTable {
        WeightTable::from_values(2, vec![0.0, 1.0, -1.0, 1.0]).unwrap()
    }

    #[test]
    fn constant_one_sums_signs() {
        let f = ConstantWeight::new(3, 1.0).unwrap();
        assert_eq!(g_table(&f, 3).unwrap().top(), GScalar::Exact(0));
        let f = ConstantWeight::new(5, 1.0).unwrap();
        assert_eq!(g_top(&f, 5).unwrap(), GScalar::Exact(0));
    }

    #[test]
    fn tight_table_gives_two() {
        let t = g_table(&tight_n2(), 2).unwrap();
        assert_eq!(t.top(), GScalar::Exact(2));
        assert_eq!(t.get(0), GScalar::Exact(1));
        assert_eq!(g_top(&tight_n2(), 2).unwrap(), GScalar::Exact(2));
    }

    #[test]
    fn single_element() {
        for v in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            let t = WeightTable::from_values(1, vec![0.0, v]).unwrap();
            assert_eq!(g_table(&t, 1).unwrap().top().to_f64(), v);
            assert_eq!(g_top(&t, 1).unwrap().to_f64(), v);
        }
    }

    #[test]
    fn rejects_bad_n() {
        let f = ConstantWeight::new(3, 1.0).unwrap();
        assert!(matches!(g_table(&f, 0), Err(Error::Size { .. })));
        assert!(matches!(g_top(&f, 4), Err(Error::Shape(_))));
        let big = ConstantWeight::new(27, 1.0).unwrap();
        assert!(matches!(g_table(&big, 27), Err(Error::Size { .. })));
    }

    #[test]
    fn table_entries_satisfy_recursion() {
        let f = WeightTable::random(6, 5, WeightMode::Uniform).unwrap();
        let t = g_table(&f, 6).unwrap();
        for mask in 1u64..64 {
            let s = SubsetMask::from_bits_unchecked(mask, 6);
            let mut sum = 0.0;
            for a in s.elements() {
                let sign = crate::subset::insertion_sign(s, a).unwrap() as f64;
                sum += sign * t.at(s.without(a).unwrap()).to_f64();
            }
            assert!((t.get(mask).to_f64() - f.eval(s) * sum).abs() < 1e-12);
        }
    }

    #[test]
    fn layered_matches_table_and_parallel() {
        for n in 1..=12 {
            for mode in WeightMode::ALL {
                let f = WeightTable::random(n, n as u64 * 31 + 7, mode).unwrap();
                let full = g_table(&f, n).unwrap().top();
                let seq = g_top(&f, n).unwrap();
                let par = g_top_parallel(&f, n).unwrap();
                assert!(full.abs_diff(seq) <= 1e-9, "n={n} {mode}: {full} vs {seq}");
                assert_eq!(seq, par);
            }
        }
    }

    #[test]
    fn pinned_pm_one_table() {
        // agreed on by brute force, full table, layered and operator evaluators
        let f = WeightTable::random(8, 42, WeightMode::PmOne).unwrap();
        assert_eq!(g_top(&f, 8).unwrap(), GScalar::Exact(640));
        assert_eq!(g_table(&f, 8).unwrap().top(), GScalar::Exact(640));
        assert_eq!(
            crate::brute::g_brute(&f, SubsetMask::full(8).unwrap()).unwrap(),
            GScalar::Exact(640)
        );
    }

    #[test]
    fn bound_check_examples() {
        let r = bound_check(&tight_n2(), 2).unwrap();
        assert_eq!(r.g_value, GScalar::Exact(2));
        assert_eq!(r.bound, 2.0);
        assert_eq!(r.ratio, 1.0);
        assert!(r.ok);

        let f = ConstantWeight::new(4, 1.0).unwrap();
        let r = bound_check(&f, 4).unwrap();
        assert_eq!(r.g_value, GScalar::Exact(0));
        assert_eq!(r.ratio, 0.0);
        assert!(r.ok);

        let f = WeightTable::random(10, 1, WeightMode::Uniform).unwrap();
        assert!(bound_check(&f, 10).unwrap().ok);
    }
}
