//! Factorial-time reference evaluators. Every other evaluator is checked
//! against these, so they stay literal: enumerate permutations, multiply the
//! prefix-set weights, add with the sign.

use num::{BigRational, Zero};

use crate::dp::GScalar;
use crate::error::{Error, Result};
use crate::fermion::PrefixProblem;
use crate::perm::for_each_permutation;
use crate::subset::SubsetMask;
use crate::weight::{ValueClass, WeightFunction};

/// Largest `|T|` (or `n`) accepted by the brute-force evaluators.
pub const BRUTE_LIMIT: usize = 10;

/// `g(T)` by direct summation over all orderings of `T`. `g(∅) = 1`.
pub fn g_brute<W: WeightFunction + ?Sized>(f: &W, t: SubsetMask) -> Result<GScalar> {
    let k = t.len();
    if k > BRUTE_LIMIT {
        return Err(Error::size("brute-force |T|", k, BRUTE_LIMIT));
    }
    if t.ambient() != f.n() {
        return Err(Error::Shape(format!(
            "subset lives in 1..={} but the weight is defined on 1..={}",
            t.ambient(),
            f.n()
        )));
    }
    let n = f.n();
    let elems: Vec<u64> = t.elements().into_iter().map(|e| 1u64 << (e - 1)).collect();

    match f.value_class() {
        ValueClass::ExactPm01 => {
            let mut total: i128 = 0;
            for_each_permutation(k, |perm, sign| {
                let mut prefix = 0u64;
                let mut prod: i128 = 1;
                for &i in perm {
                    prefix |= elems[i];
                    prod *= f.eval_exact(SubsetMask::from_bits_unchecked(prefix, n)) as i128;
                    if prod == 0 {
                        break;
                    }
                }
                total += sign as i128 * prod;
            });
            Ok(GScalar::Exact(total))
        }
        ValueClass::Real => {
            let mut total = 0.0f64;
            for_each_permutation(k, |perm, sign| {
                let mut prefix = 0u64;
                let mut prod = 1.0f64;
                for &i in perm {
                    prefix |= elems[i];
                    prod *= f.eval(SubsetMask::from_bits_unchecked(prefix, n));
                }
                total += sign as f64 * prod;
            });
            Ok(GScalar::Real(total))
        }
    }
}

/// `Σ_σ ε_σ` straight from the definition: `ε_σ = sign(σ)` unless some prefix
/// sum `x_σ(1) + … + x_σ(k)` falls below `y_k`, in which case it is 0.
pub fn epsilon_sum_brute(p: &PrefixProblem) -> Result<i64> {
    let n = p.n();
    if n > BRUTE_LIMIT {
        return Err(Error::size("brute-force epsilon sum", n, BRUTE_LIMIT));
    }
    let (x, y) = (p.x(), p.y());
    let mut total = 0i64;
    for_each_permutation(n, |perm, sign| {
        let mut sum = BigRational::zero();
        for (k, &i) in perm.iter().enumerate() {
            sum += &x[i];
            if sum < y[k] {
                return;
            }
        }
        total += sign as i64;
    });
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::{ConstantWeight, WeightTable};

    fn tight_n2() -> WeightTable {
        WeightTable::from_values(2, vec![0.0, 1.0, -1.0, 1.0]).unwrap()
    }

    #[test]
    fn constant_one_examples() {
        let f1 = ConstantWeight::new(1, 1.0).unwrap();
        assert_eq!(
            g_brute(&f1, SubsetMask::full(1).unwrap()).unwrap(),
            GScalar::Exact(1)
        );
        let f2 = ConstantWeight::new(2, 1.0).unwrap();
        assert_eq!(
            g_brute(&f2, SubsetMask::full(2).unwrap()).unwrap(),
            GScalar::Exact(0)
        );
    }

    #[test]
    fn tight_two_element_table() {
        assert_eq!(
            g_brute(&tight_n2(), SubsetMask::full(2).unwrap()).unwrap(),
            GScalar::Exact(2)
        );
    }

    #[test]
    fn empty_set_is_one() {
        let f = ConstantWeight::new(3, 0.5).unwrap();
        assert_eq!(
            g_brute(&f, SubsetMask::empty(3).unwrap()).unwrap(),
            GScalar::Real(1.0)
        );
    }

    #[test]
    fn size_limit() {
        let f = ConstantWeight::new(11, 1.0).unwrap();
        assert!(matches!(
            g_brute(&f, SubsetMask::full(11).unwrap()),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn epsilon_examples() {
        let p = |x: &[&str], y: &[&str]| PrefixProblem::parse(x, y).unwrap();
        assert_eq!(epsilon_sum_brute(&p(&["1"], &["0"])).unwrap(), 1);
        assert_eq!(epsilon_sum_brute(&p(&["1", "1"], &["0", "0"])).unwrap(), 0);
        assert_eq!(
            epsilon_sum_brute(&p(&["1", "-1"], &["0", "-1"])).unwrap(),
            1
        );
    }
}
