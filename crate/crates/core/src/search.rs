//! Search for weight tables that make `|g(N)|` large.
//!
//! `g(N)` is affine in every single table entry, so its maximum over
//! `[-1,1]^{2^n - 1}` is attained at a sign table. Both searches therefore work
//! on `±1` tables only.
//!
//! Local search uses the forward table `g` together with the backward sums
//! `h(S)` (signed sum over all ways to grow `S` into `N`, weighting every set
//! added after `S`). Every chain from `∅` to `N` passes through exactly one set
//! of each size, so `g(N) = Σ_{|S|=k} g(S) h(S)` for any `k`, and flipping the
//! sign of `f(S)` moves `g(N)` to `g(N) - 2 g(S) h(S)`. One pass over both
//! tables scores all `2^n - 1` single flips at once.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dp::{g_table, GScalar, BOUND_SLACK};
use crate::error::{Error, Result};
use crate::sqrt_n_pow_n;
use crate::subset::{full_mask, insertion_sign_bits, BitIter};
use crate::weight::WeightTable;

/// Largest `n` for [`exhaustive_max`].
pub const EXHAUSTIVE_LIMIT: usize = 4;
/// Largest `n` for [`local_search_max`].
pub const LOCAL_LIMIT: usize = 14;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchReport {
    pub n: usize,
    pub max_abs_g: i128,
    pub bound: f64,
    pub ratio: f64,
    /// Signs at masks `1..2^n`, in mask order.
    pub table: Vec<i8>,
    pub restarts_used: usize,
    pub sweeps_total: usize,
}

fn check_search_n(what: &'static str, n: usize, limit: usize) -> Result<()> {
    crate::error::check_n(what, n, limit)
}

fn exact_g(signs: &[i8], n: usize) -> Result<(Vec<i128>, i128)> {
    let table = WeightTable::from_signs(n, signs)?;
    let g = g_table(&table, n)?;
    let values: Vec<i128> = (0..1u64 << n)
        .map(|m| match g.get(m) {
            GScalar::Exact(v) => v,
            GScalar::Real(_) => unreachable!("sign tables use the exact backend"),
        })
        .collect();
    let top = values[full_mask(n) as usize];
    Ok((values, top))
}

fn report(
    n: usize,
    max_abs_g: i128,
    table: Vec<i8>,
    restarts: usize,
    sweeps: usize,
) -> Result<SearchReport> {
    let bound = sqrt_n_pow_n(n);
    let value = max_abs_g as f64;
    if value > bound * (1.0 + BOUND_SLACK) {
        return Err(Error::BoundBreach { n, value, bound });
    }
    Ok(SearchReport {
        n,
        max_abs_g,
        bound,
        ratio: value / bound,
        table,
        restarts_used: restarts,
        sweeps_total: sweeps,
    })
}

/// Exact maximum of `|g(N)|` over all `2^{2^n - 1}` sign tables. Ties go to the
/// first table in enumeration order (bit `i` of the counter set ⇔ entry `i` is -1).
pub fn exhaustive_max(n: usize) -> Result<SearchReport> {
    check_search_n("exhaustive search", n, EXHAUSTIVE_LIMIT)?;
    let entries = (1usize << n) - 1;
    let mut best: Option<(i128, u64)> = None;
    let mut signs = vec![1i8; entries];
    for code in 0..1u64 << entries {
        for (i, s) in signs.iter_mut().enumerate() {
            *s = if code >> i & 1 == 1 { -1 } else { 1 };
        }
        let (_, top) = exact_g(&signs, n)?;
        if best.is_none_or(|(b, _)| top.abs() > b) {
            best = Some((top.abs(), code));
        }
    }
    let (max, code) = best.expect("at least one table");
    let table = (0..entries)
        .map(|i| if code >> i & 1 == 1 { -1 } else { 1 })
        .collect();
    report(n, max, table, 0, 0)
}

/// `h(S)`: signed sum over chains `S ⊂ … ⊂ N` of the product of the weights of
/// every set strictly above `S`. `h(N) = 1`.
pub fn completion_sums(signs: &[i8], n: usize) -> Vec<i128> {
    let size = 1usize << n;
    let all = full_mask(n);
    let mut h = vec![0i128; size];
    h[all as usize] = 1;
    for mask in (0..all).rev() {
        h[mask as usize] = BitIter(all & !mask)
            .map(|j| {
                let t = mask | 1 << j;
                insertion_sign_bits(t, j) as i128 * signs[t as usize - 1] as i128 * h[t as usize]
            })
            .sum();
    }
    h
}

/// `g(N)` after flipping each entry, indexed like the sign vector.
pub fn flip_values(signs: &[i8], n: usize) -> Result<Vec<i128>> {
    let (g, top) = exact_g(signs, n)?;
    let h = completion_sums(signs, n);
    Ok((1..1usize << n).map(|m| top - 2 * g[m] * h[m]).collect())
}

/// Steepest-ascent climb from `start`: each sweep applies the single flip with
/// the largest strict gain in `|g(N)|` (lowest mask on ties) and stops at a
/// local maximum or after `max_sweeps`. Returns `(|g(N)|, table, sweeps)`.
pub fn climb(mut signs: Vec<i8>, n: usize, max_sweeps: usize) -> Result<(i128, Vec<i8>, usize)> {
    check_search_n("local search", n, LOCAL_LIMIT)?;
    let (_, mut current) = exact_g(&signs, n)?;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        let flips = flip_values(&signs, n)?;
        sweeps += 1;
        let mut best: Option<(usize, i128)> = None;
        for (i, &v) in flips.iter().enumerate() {
            let better = match best {
                None => v.abs() > current.abs(),
                Some((_, b)) => v.abs() > b.abs(),
            };
            if better {
                best = Some((i, v));
            }
        }
        match best {
            Some((i, v)) => {
                signs[i] = -signs[i];
                current = v;
            }
            None => break,
        }
    }
    Ok((current.abs(), signs, sweeps))
}

/// Initial sign table for restart `index`: an independent ChaCha stream per
/// restart, so the draw does not depend on execution order.
pub fn restart_table(n: usize, seed: u64, index: u64) -> Vec<i8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (1..1usize << n)
        .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
        .collect()
}

/// Best local maximum over `restarts` random starting tables.
pub fn local_search_max(
    n: usize,
    seed: u64,
    restarts: usize,
    max_sweeps: usize,
) -> Result<SearchReport> {
    check_search_n("local search", n, LOCAL_LIMIT)?;
    let runs: Vec<(i128, Vec<i8>, usize)> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| climb(restart_table(n, seed, r as u64), n, max_sweeps))
        .collect::<Result<_>>()?;
    let sweeps_total = runs.iter().map(|r| r.2).sum();
    // highest |g|, earliest restart on ties
    let best = runs
        .into_iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.0.cmp(&b.0).then(j.cmp(i)))
        .map(|(_, r)| r)
        .expect("at least one restart");
    report(n, best.0, best.1, restarts.max(1), sweeps_total)
}
