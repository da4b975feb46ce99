//! Weight functions on the nonempty subsets of `{1..n}`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_n, Error, Result};
use crate::subset::SubsetMask;
use crate::MAX_N;

/// Whether every value of a weight function lies in `{-1, 0, 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueClass {
    ExactPm01,
    Real,
}

/// A deterministic map from nonempty subsets to `[-1, 1]`.
///
/// `eval` is never called on the empty set by any evaluator in this crate.
pub trait WeightFunction: Sync {
    /// Size of the ambient set.
    fn n(&self) -> usize;

    fn eval(&self, s: SubsetMask) -> f64;

    fn value_class(&self) -> ValueClass;

    /// Integer value for `ExactPm01` weights.
    #[inline]
    fn eval_exact(&self, s: SubsetMask) -> i8 {
        self.eval(s) as i8
    }
}

impl<W: WeightFunction + ?Sized> WeightFunction for &W {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn eval(&self, s: SubsetMask) -> f64 {
        (**self).eval(s)
    }
    fn value_class(&self) -> ValueClass {
        (**self).value_class()
    }
    fn eval_exact(&self, s: SubsetMask) -> i8 {
        (**self).eval_exact(s)
    }
}

/// `f ≡ c` on every nonempty subset.
#[derive(Clone, Copy, Debug)]
pub struct ConstantWeight {
    n: usize,
    value: f64,
}

impl ConstantWeight {
    pub fn new(n: usize, value: f64) -> Result<Self> {
        check_n("constant weight", n, MAX_N)?;
        if !(-1.0..=1.0).contains(&value) {
            return Err(Error::InvalidTable(format!(
                "constant value {value} outside [-1, 1]"
            )));
        }
        Ok(ConstantWeight { n, value })
    }
}

impl WeightFunction for ConstantWeight {
    fn n(&self) -> usize {
        self.n
    }
    fn eval(&self, _s: SubsetMask) -> f64 {
        self.value
    }
    fn value_class(&self) -> ValueClass {
        class_of(self.value)
    }
}

fn class_of(v: f64) -> ValueClass {
    if v == 0.0 || v == 1.0 || v == -1.0 {
        ValueClass::ExactPm01
    } else {
        ValueClass::Real
    }
}

/// Distribution used by [`WeightTable::random`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightMode {
    Uniform,
    PmOne,
    ZeroOne,
}

impl WeightMode {
    pub const ALL: [WeightMode; 3] = [WeightMode::Uniform, WeightMode::PmOne, WeightMode::ZeroOne];

    pub fn as_str(self) -> &'static str {
        match self {
            WeightMode::Uniform => "uniform",
            WeightMode::PmOne => "pm_one",
            WeightMode::ZeroOne => "zero_one",
        }
    }
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(WeightMode::Uniform),
            "pm_one" => Ok(WeightMode::PmOne),
            "zero_one" => Ok(WeightMode::ZeroOne),
            other => Err(Error::Parse(format!(
                "unknown mode {other:?}; expected uniform, pm_one or zero_one"
            ))),
        }
    }
}

/// Explicit weight table: `values[mask]` for every mask in `0..2^n`; entry 0 is
/// reserved and held at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable {
    n: usize,
    values: Vec<f64>,
    class: ValueClass,
}

#[derive(Serialize, Deserialize)]
struct WeightTableFile {
    n: usize,
    values: Vec<f64>,
}

impl WeightTable {
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        check_n("weight table", n, MAX_N)?;
        if values.len() != 1usize << n {
            return Err(Error::InvalidTable(format!(
                "expected 2^{n} = {} values, got {}",
                1usize << n,
                values.len()
            )));
        }
        if values[0] != 0.0 {
            return Err(Error::InvalidTable(format!(
                "entry at mask 0 (empty set) must be 0, got {}",
                values[0]
            )));
        }
        for (mask, &v) in values.iter().enumerate().skip(1) {
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::InvalidTable(format!(
                    "value {v} at mask {mask} ({:?}) outside [-1, 1]",
                    SubsetMask::from_bits_unchecked(mask as u64, n)
                )));
            }
        }
        let class = Self::classify(&values);
        Ok(WeightTable { n, values, class })
    }

    fn classify(values: &[f64]) -> ValueClass {
        if values[1..]
            .iter()
            .all(|&v| class_of(v) == ValueClass::ExactPm01)
        {
            ValueClass::ExactPm01
        } else {
            ValueClass::Real
        }
    }

    /// Tabulates any weight function.
    pub fn from_fn<W: WeightFunction + ?Sized>(w: &W) -> Result<Self> {
        let n = w.n();
        check_n("weight table", n, MAX_N)?;
        let mut values = vec![0.0; 1 << n];
        for (mask, v) in values.iter_mut().enumerate().skip(1) {
            *v = w.eval(SubsetMask::from_bits_unchecked(mask as u64, n));
        }
        Self::from_values(n, values)
    }

    /// Deterministic random table for fixed `(n, seed, mode)`.
    pub fn random(n: usize, seed: u64, mode: WeightMode) -> Result<Self> {
        check_n("weight table", n, MAX_N)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = vec![0.0; 1 << n];
        for v in values.iter_mut().skip(1) {
            *v = match mode {
                WeightMode::Uniform => rng.gen_range(-1.0..=1.0),
                WeightMode::PmOne => {
                    if rng.gen::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
                WeightMode::ZeroOne => {
                    if rng.gen::<bool>() {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
        }
        Self::from_values(n, values)
    }

    /// Table from a sign vector of length `2^n - 1` (entry `i` is the value at mask `i + 1`).
    pub fn from_signs(n: usize, signs: &[i8]) -> Result<Self> {
        check_n("weight table", n, MAX_N)?;
        if signs.len() != (1usize << n) - 1 {
            return Err(Error::InvalidTable(format!(
                "expected {} signs, got {}",
                (1usize << n) - 1,
                signs.len()
            )));
        }
        let mut values = Vec::with_capacity(1 << n);
        values.push(0.0);
        values.extend(signs.iter().map(|&s| s as f64));
        Self::from_values(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, mask: u64) -> f64 {
        self.values[mask as usize]
    }

    /// Overwrites one entry, keeping the value class current.
    pub fn set(&mut self, mask: u64, value: f64) -> Result<()> {
        if mask == 0 || mask as usize >= self.values.len() {
            return Err(Error::Domain(format!(
                "mask {mask} is not a nonempty subset of 1..={}",
                self.n
            )));
        }
        if !(-1.0..=1.0).contains(&value) {
            return Err(Error::InvalidTable(format!(
                "value {value} at mask {mask} outside [-1, 1]"
            )));
        }
        self.values[mask as usize] = value;
        self.class = Self::classify(&self.values);
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&WeightTableFile {
            n: self.n,
            values: self.values.clone(),
        })
        .expect("weight table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: WeightTableFile = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("weight table JSON: {e}")))?;
        Self::from_values(file.n, file.values)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

impl WeightFunction for WeightTable {
    fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn eval(&self, s: SubsetMask) -> f64 {
        self.values[s.bits() as usize]
    }

    fn value_class(&self) -> ValueClass {
        self.class
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_tables_respect_mode() {
        let t = WeightTable::random(3, 7, WeightMode::PmOne).unwrap();
        assert_eq!(t.values().len(), 8);
        assert_eq!(t.values()[0], 0.0);
        assert!(t.values()[1..].iter().all(|&v| v.abs() == 1.0));
        assert_eq!(t.value_class(), ValueClass::ExactPm01);

        let t = WeightTable::random(1, 0, WeightMode::ZeroOne).unwrap();
        assert_eq!(t.values().len(), 2);
        assert!(t.values()[1] == 0.0 || t.values()[1] == 1.0);

        let t = WeightTable::random(6, 3, WeightMode::Uniform).unwrap();
        assert!(t.values()[1..].iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_eq!(t.value_class(), ValueClass::Real);
    }

    #[test]
    fn random_tables_are_deterministic() {
        for mode in WeightMode::ALL {
            let a = WeightTable::random(5, 99, mode).unwrap();
            let b = WeightTable::random(5, 99, mode).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, WeightTable::random(5, 100, mode).unwrap());
        }
    }

    #[test]
    fn size_limits() {
        assert!(matches!(
            WeightTable::random(0, 1, WeightMode::PmOne),
            Err(Error::Size { .. })
        ));
        assert!(matches!(
            WeightTable::random(31, 1, WeightMode::PmOne),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn json_rejects_out_of_range_and_names_mask() {
        let err = WeightTable::from_json(r#"{"n":2,"values":[0,1,1.5,-1]}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("mask 2"), "{msg}");

        let err = WeightTable::from_json(r#"{"n":2,"values":[1,1,1,-1]}"#).unwrap_err();
        assert!(err.to_string().contains("mask 0"));

        let err = WeightTable::from_json(r#"{"n":2,"values":[0,1,1]}"#).unwrap_err();
        assert!(matches!(err, Error::InvalidTable(_)));

        let err = WeightTable::from_json(r#"{"n":2,"values":[0,1,"#).unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn json_round_trip() {
        let t = WeightTable::random(4, 11, WeightMode::Uniform).unwrap();
        assert_eq!(WeightTable::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn set_updates_class() {
        let mut t = WeightTable::random(3, 1, WeightMode::PmOne).unwrap();
        t.set(5, 0.25).unwrap();
        assert_eq!(t.value_class(), ValueClass::Real);
        t.set(5, 0.0).unwrap();
        assert_eq!(t.value_class(), ValueClass::ExactPm01);
        assert!(t.set(0, 1.0).is_err());
        assert!(t.set(3, 2.0).is_err());
    }

    #[test]
    fn mode_parsing() {
        for m in WeightMode::ALL {
            assert_eq!(m.as_str().parse::<WeightMode>().unwrap(), m);
        }
        assert!("gauss".parse::<WeightMode>().is_err());
    }
}
