//! Subsets of `N = {1..n}` as 64-bit masks, plus the colex ranking used to
//! store one popcount level densely.
//!
//! Element `i` lives at bit `i - 1`. All public element arguments are 1-based.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::MAX_N;

/// A subset of `{1..n}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    bits: u64,
    n: u32,
}

impl SubsetMask {
    pub fn new(bits: u64, n: usize) -> Result<Self> {
        if n > MAX_N {
            return Err(Error::size("subset ambient set", n, MAX_N));
        }
        if bits >> n != 0 {
            return Err(Error::Domain(format!(
                "mask {bits:#b} has bits outside the ambient set of size {n}"
            )));
        }
        Ok(SubsetMask { bits, n: n as u32 })
    }

    /// Caller guarantees `bits < 2^n` and `n <= MAX_N`.
    #[inline]
    pub(crate) fn from_bits_unchecked(bits: u64, n: usize) -> Self {
        debug_assert!(n <= MAX_N && bits >> n == 0);
        SubsetMask { bits, n: n as u32 }
    }

    /// Builds a subset from 1-based elements.
    pub fn from_elements(elements: &[usize], n: usize) -> Result<Self> {
        let mut bits = 0u64;
        for &e in elements {
            if e == 0 || e > n {
                return Err(Error::Domain(format!("element {e} not in 1..={n}")));
            }
            bits |= 1 << (e - 1);
        }
        Self::new(bits, n)
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(0, n)
    }

    pub fn full(n: usize) -> Result<Self> {
        if n > MAX_N {
            return Err(Error::size("subset ambient set", n, MAX_N));
        }
        Self::new(full_mask(n), n)
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn ambient(self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    #[inline]
    pub fn contains(self, element: usize) -> bool {
        element >= 1 && element <= self.n as usize && self.bits & (1 << (element - 1)) != 0
    }

    /// Elements in increasing order, 1-based.
    pub fn elements(self) -> Vec<usize> {
        BitIter(self.bits).map(|b| b + 1).collect()
    }

    pub fn without(self, element: usize) -> Result<Self> {
        if !self.contains(element) {
            return Err(Error::Domain(format!("element {element} not in {self:?}")));
        }
        Ok(SubsetMask {
            bits: self.bits & !(1 << (element - 1)),
            n: self.n,
        })
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.elements().into_iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

/// `(-1)^c` where `c = |{t ∈ T : t > a}|`: the sign picked up when `e_a` is
/// moved from the end of `e_{t_1} ∧ … ∧ e_{t_k}` into sorted position.
pub fn insertion_sign(t: SubsetMask, a: usize) -> Result<i8> {
    if !t.contains(a) {
        return Err(Error::Domain(format!(
            "element {a} is not a member of {t:?}"
        )));
    }
    Ok(insertion_sign_bits(t.bits, a - 1))
}

/// Same as [`insertion_sign`] on raw bits with a 0-based bit position.
#[inline]
pub(crate) fn insertion_sign_bits(bits: u64, pos: usize) -> i8 {
    let above = bits >> pos >> 1;
    if above.count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

#[inline]
pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Iterates over set bit positions, lowest first.
#[derive(Clone, Copy)]
pub(crate) struct BitIter(pub u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

/// Pascal triangle up to 64 for colex ranking.
pub(crate) struct Binomials {
    table: Vec<[u64; 65]>,
}

/// Shared instance.
pub(crate) fn binomials() -> &'static Binomials {
    static TABLE: OnceLock<Binomials> = OnceLock::new();
    TABLE.get_or_init(Binomials::new)
}

impl Binomials {
    fn new() -> Self {
        let mut table = vec![[0u64; 65]; 65];
        for m in 0..=64 {
            table[m][0] = 1;
            for r in 1..=m {
                table[m][r] = table[m - 1][r - 1].saturating_add(table[m - 1][r]);
            }
        }
        Binomials { table }
    }

    #[inline]
    pub fn choose(&self, m: usize, r: usize) -> u64 {
        if r > m {
            0
        } else {
            self.table[m][r]
        }
    }

    /// Colex rank of a mask among masks of the same popcount. This is the
    /// position of the mask when the level is listed in increasing numeric order.
    #[inline]
    pub fn rank(&self, bits: u64) -> usize {
        BitIter(bits)
            .enumerate()
            .map(|(i, p)| self.choose(p, i + 1))
            .sum::<u64>() as usize
    }

    /// Inverse of [`Binomials::rank`] for popcount `k`.
    pub fn unrank(&self, mut rank: u64, k: usize) -> u64 {
        let mut bits = 0u64;
        for i in (1..=k).rev() {
            let mut p = i - 1;
            while self.choose(p + 1, i) <= rank {
                p += 1;
            }
            rank -= self.choose(p, i);
            bits |= 1 << p;
        }
        bits
    }
}

/// Next larger integer with the same popcount (Gosper's hack). `x` must be nonzero.
#[inline]
pub(crate) fn next_same_popcount(x: u64) -> u64 {
    let c = x & x.wrapping_neg();
    let r = x.wrapping_add(c);
    (((r ^ x) >> 2) / c) | r
}

/// All masks of popcount `k` within `n` bits, in increasing numeric (= colex) order.
pub(crate) fn level_masks(n: usize, k: usize) -> impl Iterator<Item = u64> {
    let limit = full_mask(n);
    let first = if k == 0 { 0 } else { full_mask(k) };
    let mut cur = Some(first);
    std::iter::from_fn(move || {
        let m = cur?;
        cur = if m == 0 {
            None
        } else {
            let nx = next_same_popcount(m);
            (nx <= limit && nx > m).then_some(nx)
        };
        Some(m)
    })
    .take_while(move |&m| m <= limit && (k <= n))
}
