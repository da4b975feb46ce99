//! Exterior-algebra formulation of `g`.
//!
//! `Λ^k ℝ^n` is identified with `ℝ^{G_k}`, `G_k` the `k`-subsets of `{1..n}`,
//! through the orthonormal basis `δ_S = e_{s_1} ∧ … ∧ e_{s_k}`. With
//! `P δ_S = f(S) δ_S` and `R φ = φ ∧ α`, `α = (e_1 + … + e_n)/√n`, the insertion
//! recursion for `g` reads `g|_{G_k} = √n · P R g|_{G_{k-1}}`, so
//! `g(N) δ_N = √n^n (P∘R)^n δ_∅`.

use rayon::prelude::*;

use crate::error::{check_n, Error, Result};
use crate::subset::{
    binomials, full_mask, insertion_sign_bits, next_same_popcount, BitIter, SubsetMask,
};
use crate::weight::WeightFunction;

/// Largest `n` accepted by [`wedge_basis`] and [`gram_inner`].
pub const WEDGE_LIMIT: usize = 12;
/// Largest `n` for the dense operator pipeline.
pub const OPERATOR_LIMIT: usize = 20;

/// Below this magnitude a determinant is reported as exactly zero.
const DET_FLOOR: f64 = 1e-300;

/// One homogeneous level of the exterior algebra, stored densely. Entry `i` is
/// the coefficient of `δ_S` for the `i`-th `k`-subset in increasing mask order.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedVector {
    n: usize,
    k: usize,
    coeffs: Vec<f64>,
}

impl GradedVector {
    pub fn zeros(n: usize, k: usize) -> Result<Self> {
        check_level(n, k)?;
        let len = binomials().choose(n, k) as usize;
        Ok(GradedVector {
            n,
            k,
            coeffs: vec![0.0; len],
        })
    }

    pub fn from_coeffs(n: usize, k: usize, coeffs: Vec<f64>) -> Result<Self> {
        let v = Self::zeros(n, k)?;
        if coeffs.len() != v.coeffs.len() {
            return Err(Error::Shape(format!(
                "level {k} of n = {n} has {} coefficients, got {}",
                v.coeffs.len(),
                coeffs.len()
            )));
        }
        Ok(GradedVector { coeffs, ..v })
    }

    /// The basis vector `δ_S`.
    pub fn basis(s: SubsetMask) -> Result<Self> {
        let mut v = Self::zeros(s.ambient(), s.len())?;
        let r = binomials().rank(s.bits());
        v.coeffs[r] = 1.0;
        Ok(v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.k
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `δ_S`; zero when `|S|` is not this level.
    pub fn coeff(&self, s: SubsetMask) -> f64 {
        if s.len() != self.k || s.ambient() != self.n {
            return 0.0;
        }
        self.coeffs[binomials().rank(s.bits())]
    }

    /// `(mask, coefficient)` pairs in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        crate::subset::level_masks(self.n, self.k).zip(self.coeffs.iter().copied())
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scale(mut self, c: f64) -> Self {
        self.coeffs.iter_mut().for_each(|x| *x *= c);
        self
    }

    pub fn add(&self, other: &GradedVector) -> Result<GradedVector> {
        same_shape(self, other)?;
        Ok(GradedVector {
            n: self.n,
            k: self.k,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }
}

fn check_level(n: usize, k: usize) -> Result<()> {
    check_n("graded vector", n, crate::MAX_N)?;
    if k > n {
        return Err(Error::Shape(format!("level {k} exceeds n = {n}")));
    }
    Ok(())
}

fn same_shape(u: &GradedVector, v: &GradedVector) -> Result<()> {
    if u.n != v.n || u.k != v.k {
        return Err(Error::Shape(format!(
            "Λ^{} ℝ^{} vs Λ^{} ℝ^{}",
            u.k, u.n, v.k, v.n
        )));
    }
    Ok(())
}

/// `⟨u, v⟩ = Σ_S u_S v_S`.
pub fn inner_product(u: &GradedVector, v: &GradedVector) -> Result<f64> {
    same_shape(u, v)?;
    Ok(u.coeffs.iter().zip(&v.coeffs).map(|(a, b)| a * b).sum())
}

/// Determinant of a square row-major matrix by LU with partial pivoting.
pub fn determinant(mut a: Vec<f64>, k: usize) -> f64 {
    assert_eq!(a.len(), k * k);
    let mut det = 1.0;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i * k + col].abs().total_cmp(&a[j * k + col].abs()))
            .unwrap();
        let p = a[pivot * k + col];
        if p == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..k {
                a.swap(pivot * k + j, col * k + j);
            }
            det = -det;
        }
        det *= p;
        for row in col + 1..k {
            let factor = a[row * k + col] / p;
            if factor != 0.0 {
                for j in col + 1..k {
                    a[row * k + j] -= factor * a[col * k + j];
                }
            }
        }
    }
    if det.abs() < DET_FLOOR {
        0.0
    } else {
        det
    }
}

fn check_vectors(vs: &[Vec<f64>], n: usize) -> Result<()> {
    if let Some(v) = vs.iter().find(|v| v.len() != n) {
        return Err(Error::Shape(format!(
            "vector of length {} in ℝ^{n}",
            v.len()
        )));
    }
    Ok(())
}

/// `v_1 ∧ … ∧ v_k` in the `δ_S` basis: the coefficient of `δ_S` is the minor
/// with rows `v_i` and columns `S`.
pub fn wedge_basis(vectors: &[Vec<f64>], n: usize) -> Result<GradedVector> {
    let k = vectors.len();
    check_n("wedge product", n, WEDGE_LIMIT)?;
    if k == 0 || k > n {
        return Err(Error::Shape(format!("cannot wedge {k} vectors in ℝ^{n}")));
    }
    check_vectors(vectors, n)?;
    let coeffs = crate::subset::level_masks(n, k)
        .map(|mask| {
            let cols: Vec<usize> = BitIter(mask).collect();
            let minor = vectors
                .iter()
                .flat_map(|v| cols.iter().map(move |&c| v[c]))
                .collect();
            determinant(minor, k)
        })
        .collect();
    Ok(GradedVector { n, k, coeffs })
}

/// `det(⟨v_i, w_j⟩)`.
pub fn gram_inner(v: &[Vec<f64>], w: &[Vec<f64>]) -> Result<f64> {
    let k = v.len();
    if w.len() != k {
        return Err(Error::Shape(format!("{k} vectors against {}", w.len())));
    }
    if k > WEDGE_LIMIT {
        return Err(Error::size("Gram determinant", k, WEDGE_LIMIT));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let n = v[0].len();
    check_vectors(v, n)?;
    check_vectors(w, n)?;
    let gram = v
        .iter()
        .flat_map(|vi| {
            w.iter()
                .map(move |wj| vi.iter().zip(wj).map(|(a, b)| a * b).sum())
        })
        .collect();
    Ok(determinant(gram, k))
}

/// `δ_S ↦ f(S) δ_S`.
pub fn apply_p<W: WeightFunction + ?Sized>(f: &W, v: &GradedVector) -> Result<GradedVector> {
    if v.k == 0 {
        return Err(Error::Level("P is only applied on levels k ≥ 1".into()));
    }
    if f.n() != v.n {
        return Err(Error::Shape(format!(
            "weight on 1..={} applied to a vector over ℝ^{}",
            f.n(),
            v.n
        )));
    }
    let n = v.n;
    let coeffs = v
        .iter()
        .map(|(mask, c)| c * f.eval(SubsetMask::from_bits_unchecked(mask, n)))
        .collect();
    Ok(GradedVector { n, k: v.k, coeffs })
}

const CHUNK: usize = 1 << 12;

/// `φ ↦ φ ∧ α`, level `k` to `k + 1`.
pub fn apply_r(v: &GradedVector) -> Result<GradedVector> {
    if v.k >= v.n {
        return Err(Error::Level(format!(
            "R maps level k to k+1; level {} is the top of n = {}",
            v.k, v.n
        )));
    }
    let (n, k) = (v.n, v.k + 1);
    let binom = binomials();
    let scale = 1.0 / (n as f64).sqrt();
    let mut out = vec![0.0; binom.choose(n, k) as usize];
    // gather form: (Rφ)_T = (1/√n) Σ_{j∈T} sign(T, j) φ_{T∖j}
    out.par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(c, chunk)| {
            let mut mask = binom.unrank((c * CHUNK) as u64, k);
            for (i, slot) in chunk.iter_mut().enumerate() {
                if i > 0 {
                    mask = next_same_popcount(mask);
                }
                let acc: f64 = BitIter(mask)
                    .map(|j| {
                        let src = binom.rank(mask & !(1 << j));
                        insertion_sign_bits(mask, j) as f64 * v.coeffs[src]
                    })
                    .sum();
                *slot = acc * scale;
            }
        });
    Ok(GradedVector { n, k, coeffs: out })
}

/// Adjoint of [`apply_r`], level `k + 1` to `k`:
/// `(R*ψ)_S = (1/√n) Σ_{j∉S} sign(S ∪ j, j) ψ_{S∪j}`.
pub fn apply_r_adjoint(v: &GradedVector) -> Result<GradedVector> {
    if v.k == 0 {
        return Err(Error::Level(
            "R* maps level k+1 to k; level 0 has no image".into(),
        ));
    }
    let (n, k) = (v.n, v.k - 1);
    let binom = binomials();
    let scale = 1.0 / (n as f64).sqrt();
    let all = full_mask(n);
    let mut out = vec![0.0; binom.choose(n, k) as usize];
    out.par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(c, chunk)| {
            let mut mask = binom.unrank((c * CHUNK) as u64, k);
            for (i, slot) in chunk.iter_mut().enumerate() {
                if i > 0 {
                    mask = next_same_popcount(mask);
                }
                let acc: f64 = BitIter(all & !mask)
                    .map(|j| {
                        let t = mask | (1 << j);
                        insertion_sign_bits(t, j) as f64 * v.coeffs[binom.rank(t)]
                    })
                    .sum();
                *slot = acc * scale;
            }
        });
    Ok(GradedVector { n, k, coeffs: out })
}

/// `g(N)` as the `δ_N` coefficient of `√n^n (P∘R)^n δ_∅`, with the `√n`
/// applied after each `P∘R` step so that level `k` holds `g|_{G_k}`.
pub fn g_operator<W: WeightFunction + ?Sized>(f: &W, n: usize) -> Result<f64> {
    check_n("operator pipeline", n, OPERATOR_LIMIT)?;
    if f.n() != n {
        return Err(Error::Shape(format!(
            "weight is defined on 1..={} but n = {n} was requested",
            f.n()
        )));
    }
    let root = (n as f64).sqrt();
    let mut v = GradedVector::basis(SubsetMask::empty(n)?)?;
    for _ in 0..n {
        v = apply_p(f, &apply_r(&v)?)?.scale(root);
    }
    Ok(v.coeffs[0])
}
