//! Signed permutation sums with prefix-set weights.
//!
//! For a weight function `f` on the nonempty subsets of `N = {1..n}` with values
//! in `[-1, 1]`, the quantity
//!
//! ```text
//! g(T) = Σ_{σ ∈ S_k} sign(σ) · Π_{i=1..k} f({t_σ(1), …, t_σ(i)})
//! ```
//!
//! is evaluated three independent ways:
//!
//! * [`brute`]: literal enumeration of permutations (factorial time, the oracle),
//! * [`dp`]: the insertion recursion over subset bitmasks (`O(n·2^n)`),
//! * [`wedge`]: the exterior-algebra pipeline `g(N)δ_N = √n^n (P∘R)^n δ_∅`.
//!
//! [`fermion`] builds the prefix-threshold weight and the `ε_σ` sum on top of
//! these, and [`search`] probes how close `|g(N)|` gets to the `√n^n` bound.

pub mod brute;
pub mod cli;
pub mod dp;
pub mod error;
pub mod fermion;
pub mod perm;
pub mod search;
pub mod subset;
pub mod wedge;
pub mod weight;

pub use error::{Error, Result};
pub use perm::Permutation;
pub use subset::SubsetMask;
pub use weight::{ValueClass, WeightFunction, WeightMode, WeightTable};

/// Largest ambient set size accepted anywhere.
pub const MAX_N: usize = 30;

/// `√n^n = n^{n/2}` in double precision.
pub fn sqrt_n_pow_n(n: usize) -> f64 {
    (n as f64).powf(n as f64 / 2.0)
}
