//! Permutations of `{1..n}`, their sign, and a minimal-change enumerator.

use crate::error::{Error, Result};

/// A bijection on `{1..n}` stored as its image list `(σ(1), …, σ(n))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &v in &images {
            if v == 0 || v > n || seen[v] {
                return Err(Error::Domain(format!(
                    "{images:?} is not a permutation of 1..={n}"
                )));
            }
            seen[v] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (1..=n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `σ(i)` for 1-based `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::Shape(format!(
                "cannot compose permutations of sizes {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Permutation {
            images: other.images.iter().map(|&i| self.images[i - 1]).collect(),
        })
    }

    pub fn inversions(&self) -> usize {
        let p = &self.images;
        (0..p.len())
            .map(|i| p[i + 1..].iter().filter(|&&q| q < p[i]).count())
            .sum()
    }
}

/// `(-1)^{inversions}`.
pub fn perm_sign(p: &Permutation) -> i8 {
    if p.inversions().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Visits every permutation of `{0..k}` (0-based images) with its sign, in
/// Steinhaus–Johnson–Trotter order. Consecutive permutations differ by one
/// adjacent transposition, so the sign is flipped rather than recomputed.
pub fn for_each_permutation<F: FnMut(&[usize], i8)>(k: usize, mut visit: F) {
    let mut perm: Vec<usize> = (0..k).collect();
    // direction per value: true = pointing left
    let mut left = vec![true; k];
    let mut pos: Vec<usize> = (0..k).collect();
    let mut sign = 1i8;
    loop {
        visit(&perm, sign);
        // largest mobile value
        let mut mobile = None;
        for v in (0..k).rev() {
            let p = pos[v];
            let target = if left[v] {
                p.checked_sub(1)
            } else if p + 1 < k {
                Some(p + 1)
            } else {
                None
            };
            if let Some(t) = target {
                if perm[t] < v {
                    mobile = Some((v, p, t));
                    break;
                }
            }
        }
        let Some((v, p, t)) = mobile else { return };
        let w = perm[t];
        perm.swap(p, t);
        pos[v] = t;
        pos[w] = p;
        sign = -sign;
        for d in left.iter_mut().skip(v + 1) {
            *d = !*d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn p(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    #[test]
    fn sign_examples() {
        assert_eq!(perm_sign(&Permutation::identity(4)), 1);
        assert_eq!(perm_sign(&p(&[2, 1])), -1);
        assert_eq!(perm_sign(&p(&[2, 3, 1])), 1);
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![1, 1]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        assert!(Permutation::new(vec![1, 3]).is_err());
    }

    #[test]
    fn compose_is_function_composition() {
        let a = p(&[2, 3, 1]);
        let b = p(&[3, 1, 2]);
        let c = a.compose(&b).unwrap();
        for i in 1..=3 {
            assert_eq!(c.apply(i), a.apply(b.apply(i)));
        }
        assert!(a.compose(&Permutation::identity(2)).is_err());
    }

    #[test]
    fn enumerator_is_complete_minimal_change_and_signed() {
        for k in 0..=7 {
            let mut seen = HashSet::new();
            let mut prev: Option<Vec<usize>> = None;
            for_each_permutation(k, |perm, sign| {
                let images: Vec<usize> = perm.iter().map(|&i| i + 1).collect();
                assert_eq!(sign, perm_sign(&p(&images)));
                if let Some(q) = &prev {
                    let diff: Vec<usize> = (0..k).filter(|&i| q[i] != perm[i]).collect();
                    assert_eq!(diff.len(), 2);
                    assert_eq!(diff[1], diff[0] + 1);
                }
                prev = Some(perm.to_vec());
                assert!(seen.insert(perm.to_vec()));
            });
            let fact: usize = (1..=k).product();
            assert_eq!(seen.len(), fact, "k={k}");
        }
    }
}
