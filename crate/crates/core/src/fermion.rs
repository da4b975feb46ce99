//! Prefix-threshold instances: weights `f(S) = [Σ_{j∈S} x_j ≥ y_{|S|}]` and the
//! signed permutation count `Σ_σ ε_σ` they induce.
//!
//! All comparisons are exact. On construction of a [`FermionWeight`] the
//! rationals are brought to a common denominator, so evaluating a subset is a
//! sum of integers (`i128` when it provably fits, big integers otherwise).

use std::path::Path;

use num::bigint::Sign;
use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dp::{g_top, GScalar};
use crate::error::{check_n, Error, Result};
use crate::subset::{BitIter, SubsetMask};
use crate::weight::{ValueClass, WeightFunction};
use crate::{sqrt_n_pow_n, MAX_N};

/// Parses `"p/q"`, an integer, or a decimal such as `"-1.25"` / `"3e-2"` exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("{text:?} is not a rational number"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("{text:?} has a zero denominator")));
        }
        return Ok(BigRational::new(num, den));
    }

    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part
            .bytes()
            .chain(frac_part.bytes())
            .all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigInt::parse_bytes(all_digits.as_bytes(), 10).unwrap_or_else(BigInt::zero);
    if negative {
        value = -value;
    }
    let scale = exp as i64 - frac_part.len() as i64;
    if scale.unsigned_abs() > 10_000 {
        return Err(Error::Parse(format!(
            "{text:?} has an unreasonable exponent"
        )));
    }
    let ten = BigInt::from(10);
    let power = num::pow(ten, scale.unsigned_abs() as usize);
    Ok(if scale >= 0 {
        BigRational::from_integer(value * power)
    } else {
        BigRational::new(value, power)
    })
}

/// Tuples `x`, `y` of equal length `n ≥ 1`. `y_k` is the threshold for prefixes
/// of size `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixProblem {
    x: Vec<BigRational>,
    y: Vec<BigRational>,
}

#[derive(Serialize, Deserialize)]
struct ProblemFile {
    x: Vec<String>,
    y: Vec<String>,
}

impl PrefixProblem {
    pub fn new(x: Vec<BigRational>, y: Vec<BigRational>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Shape(format!(
                "x has {} entries but y has {}",
                x.len(),
                y.len()
            )));
        }
        check_n("prefix problem", x.len(), MAX_N)?;
        // BigRational::new already reduces; this only normalizes values built raw
        let canon = |v: Vec<BigRational>| v.into_iter().map(|r| r.reduced()).collect();
        Ok(PrefixProblem {
            x: canon(x),
            y: canon(y),
        })
    }

    pub fn parse<S: AsRef<str>>(x: &[S], y: &[S]) -> Result<Self> {
        let field = |name: &str, v: &[S]| -> Result<Vec<BigRational>> {
            v.iter()
                .enumerate()
                .map(|(i, s)| {
                    parse_rational(s.as_ref())
                        .map_err(|e| Error::Parse(format!("field {name}[{i}]: {e}")))
                })
                .collect()
        };
        Self::new(field("x", x)?, field("y", y)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("problem JSON: {e}")))?;
        Self::parse(&file.x, &file.y)
    }

    pub fn to_json(&self) -> String {
        let file = ProblemFile {
            x: self.x.iter().map(|r| r.to_string()).collect(),
            y: self.y.iter().map(|r| r.to_string()).collect(),
        };
        serde_json::to_string(&file).expect("problem serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[BigRational] {
        &self.x
    }

    pub fn y(&self) -> &[BigRational] {
        &self.y
    }

    /// Multiplies every `x_j` and every `y_k` by `c`.
    pub fn scaled(&self, c: &BigRational) -> Result<Self> {
        Self::new(
            self.x.iter().map(|v| v * c).collect(),
            self.y.iter().map(|v| v * c).collect(),
        )
    }
}

#[derive(Clone, Debug)]
enum Scaled {
    Small { x: Vec<i128>, y: Vec<i128> },
    Big { x: Vec<BigInt>, y: Vec<BigInt> },
}

/// The 0/1 weight `f(S) = 1` iff `Σ_{j∈S} x_j ≥ y_{|S|}`.
#[derive(Clone, Debug)]
pub struct FermionWeight {
    n: usize,
    scaled: Scaled,
}

/// Entries above this magnitude force the big-integer path; `MAX_N` of them
/// still sum inside `i128`.
const SMALL_LIMIT: i128 = i128::MAX / 64;

pub fn fermion_weight(p: &PrefixProblem) -> FermionWeight {
    let lcm =
        p.x.iter()
            .chain(&p.y)
            .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let scale = |v: &[BigRational]| -> Vec<BigInt> {
        v.iter().map(|r| r.numer() * (&lcm / r.denom())).collect()
    };
    let (x, y) = (scale(&p.x), scale(&p.y));
    let small = |v: &[BigInt]| -> Option<Vec<i128>> {
        v.iter()
            .map(|b| b.to_i128().filter(|s| s.abs() <= SMALL_LIMIT))
            .collect()
    };
    let scaled = match (small(&x), small(&y)) {
        (Some(x), Some(y)) => Scaled::Small { x, y },
        _ => Scaled::Big { x, y },
    };
    FermionWeight { n: p.n(), scaled }
}

impl FermionWeight {
    pub fn holds(&self, bits: u64) -> bool {
        let k = bits.count_ones() as usize;
        if k == 0 {
            return false;
        }
        match &self.scaled {
            Scaled::Small { x, y } => {
                let sum: i128 = BitIter(bits).map(|b| x[b]).sum();
                sum >= y[k - 1]
            }
            Scaled::Big { x, y } => {
                let sum: BigInt = BitIter(bits).map(|b| &x[b]).sum();
                let diff = sum - &y[k - 1];
                diff.sign() != Sign::Minus
            }
        }
    }
}

impl WeightFunction for FermionWeight {
    fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn eval(&self, s: SubsetMask) -> f64 {
        if self.holds(s.bits()) {
            1.0
        } else {
            0.0
        }
    }

    #[inline]
    fn eval_exact(&self, s: SubsetMask) -> i8 {
        self.holds(s.bits()) as i8
    }

    fn value_class(&self) -> ValueClass {
        ValueClass::ExactPm01
    }
}

/// `Σ_σ ε_σ`, computed as `g(N)` for the prefix-threshold weight.
pub fn epsilon_sum(p: &PrefixProblem) -> Result<i128> {
    let f = fermion_weight(p);
    match g_top(&f, p.n())? {
        GScalar::Exact(v) => Ok(v),
        GScalar::Real(_) => unreachable!("prefix-threshold weights are 0/1 valued"),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PropositionReport {
    pub n: usize,
    pub sum: i128,
    pub bound: f64,
    /// `sum ≤ √n^n`.
    pub ok: bool,
    /// `|sum| ≤ √n^n`.
    pub two_sided_ok: bool,
}

pub fn proposition_check(p: &PrefixProblem) -> Result<PropositionReport> {
    let sum = epsilon_sum(p)?;
    Ok(proposition_report(p.n(), sum))
}

pub fn proposition_report(n: usize, sum: i128) -> PropositionReport {
    let bound = sqrt_n_pow_n(n);
    let slack = bound * (1.0 + crate::dp::BOUND_SLACK);
    PropositionReport {
        n,
        sum,
        bound,
        ok: (sum as f64) <= slack,
        two_sided_ok: (sum as f64).abs() <= slack,
    }
}
