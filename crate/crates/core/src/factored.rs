//! Implicit `n × n` matrices of the form `D₁(VᵀV)D₂ + Σₖ uₖwₖᵀ`.
//!
//! `V` is shared between every matrix derived from the same kernel; scalings
//! and rank-one terms are plain vectors. Every product costs `O(n(r + t))`
//! for `r` features and `t` rank-one terms.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::{check_len, Error, Result};

/// Largest `n` for which [`FactoredMatrix::to_dense`] will materialize.
pub const DENSE_CAP: usize = 4096;

/// One `u wᵀ` term.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOne {
    pub u: Array1<f64>,
    pub w: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct FactoredMatrix {
    /// `n × r`, row `i` is column `i` of `V`.
    features: Arc<Array2<f64>>,
    left: Array1<f64>,
    right: Array1<f64>,
    rank_one: Vec<RankOne>,
}

/// Reusable `r`-length buffers for allocation-free products.
#[derive(Debug, Default, Clone)]
pub struct MatvecScratch {
    sum: Vec<f64>,
    comp: Vec<f64>,
}

impl FactoredMatrix {
    /// `VᵀV` with unit scalings and no rank-one terms.
    pub fn from_features(features: Arc<Array2<f64>>) -> Self {
        let n = features.nrows();
        Self {
            features,
            left: Array1::ones(n),
            right: Array1::ones(n),
            rank_one: Vec::new(),
        }
    }

    /// The zero matrix (rank-zero Gram part).
    pub fn zeros(n: usize) -> Self {
        Self::from_features(Arc::new(Array2::zeros((n, 0))))
    }

    pub fn new(
        features: Arc<Array2<f64>>,
        left: Array1<f64>,
        right: Array1<f64>,
        rank_one: Vec<RankOne>,
    ) -> Result<Self> {
        let n = features.nrows();
        check_len(n, left.len())?;
        check_len(n, right.len())?;
        check_nonnegative("left scale", &left)?;
        check_nonnegative("right scale", &right)?;
        for term in &rank_one {
            check_len(n, term.u.len())?;
            check_len(n, term.w.len())?;
            check_finite("rank-one u", &term.u)?;
            check_finite("rank-one w", &term.w)?;
        }
        check_finite("features", features.iter())?;
        Ok(Self {
            features,
            left,
            right,
            rank_one,
        })
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    /// Number of features `r` in the Gram part.
    pub fn rank(&self) -> usize {
        self.features.ncols()
    }

    pub fn num_rank_one(&self) -> usize {
        self.rank_one.len()
    }

    pub fn features(&self) -> &Arc<Array2<f64>> {
        &self.features
    }

    pub fn left_scale(&self) -> &Array1<f64> {
        &self.left
    }

    pub fn right_scale(&self) -> &Array1<f64> {
        &self.right
    }

    pub fn rank_one_terms(&self) -> &[RankOne] {
        &self.rank_one
    }

    pub fn matvec(&self, z: &[f64]) -> Result<Array1<f64>> {
        let mut out = Array1::zeros(self.n());
        self.matvec_into(z, out.as_slice_mut().unwrap(), &mut MatvecScratch::default())?;
        Ok(out)
    }

    pub fn matvec_transpose(&self, z: &[f64]) -> Result<Array1<f64>> {
        let mut out = Array1::zeros(self.n());
        self.matvec_transpose_into(z, out.as_slice_mut().unwrap(), &mut MatvecScratch::default())?;
        Ok(out)
    }

    /// `out ← A z`, evaluated as right scale → `V` → `Vᵀ` → left scale.
    pub fn matvec_into(&self, z: &[f64], out: &mut [f64], scratch: &mut MatvecScratch) -> Result<()> {
        check_len(self.n(), z.len())?;
        check_len(self.n(), out.len())?;
        gram_apply(&self.features, &self.right, &self.left, z, out, scratch);
        for term in &self.rank_one {
            let s = dot(term.w.as_slice().unwrap(), z);
            for (o, &u) in out.iter_mut().zip(&term.u) {
                *o += u * s;
            }
        }
        Ok(())
    }

    /// `out ← Aᵀ z`.
    pub fn matvec_transpose_into(
        &self,
        z: &[f64],
        out: &mut [f64],
        scratch: &mut MatvecScratch,
    ) -> Result<()> {
        check_len(self.n(), z.len())?;
        check_len(self.n(), out.len())?;
        gram_apply(&self.features, &self.left, &self.right, z, out, scratch);
        for term in &self.rank_one {
            let s = dot(term.u.as_slice().unwrap(), z);
            for (o, &w) in out.iter_mut().zip(&term.w) {
                *o += w * s;
            }
        }
        Ok(())
    }

    pub fn row_sums(&self) -> Array1<f64> {
        self.matvec(&vec![1.0; self.n()]).expect("length matches by construction")
    }

    pub fn col_sums(&self) -> Array1<f64> {
        self.matvec_transpose(&vec![1.0; self.n()])
            .expect("length matches by construction")
    }

    pub fn total_mass(&self) -> f64 {
        self.row_sums().sum()
    }

    /// Factorization of `diag(s)·A`. Entries of `s` must be positive.
    pub fn scale_rows(&self, s: &[f64]) -> Result<Self> {
        check_positive(s)?;
        self.scale_rows_nonneg(s)
    }

    /// Factorization of `A·diag(s)`. Entries of `s` must be positive.
    pub fn scale_cols(&self, s: &[f64]) -> Result<Self> {
        check_positive(s)?;
        self.scale_cols_nonneg(s)
    }

    /// Row scaling that also admits zero factors; rounding zeroes rows whose
    /// target mass is zero.
    pub(crate) fn scale_rows_nonneg(&self, s: &[f64]) -> Result<Self> {
        check_len(self.n(), s.len())?;
        check_nonnegative("row scale", s)?;
        let s = ndarray::ArrayView1::from(s);
        Ok(Self {
            features: Arc::clone(&self.features),
            left: &self.left * &s,
            right: self.right.clone(),
            rank_one: self
                .rank_one
                .iter()
                .map(|t| RankOne {
                    u: &t.u * &s,
                    w: t.w.clone(),
                })
                .collect(),
        })
    }

    pub(crate) fn scale_cols_nonneg(&self, s: &[f64]) -> Result<Self> {
        check_len(self.n(), s.len())?;
        check_nonnegative("column scale", s)?;
        let s = ndarray::ArrayView1::from(s);
        Ok(Self {
            features: Arc::clone(&self.features),
            left: self.left.clone(),
            right: &self.right * &s,
            rank_one: self
                .rank_one
                .iter()
                .map(|t| RankOne {
                    u: t.u.clone(),
                    w: &t.w * &s,
                })
                .collect(),
        })
    }

    /// Appends `u wᵀ`.
    pub fn add_rank_one(&self, u: Array1<f64>, w: Array1<f64>) -> Result<Self> {
        check_len(self.n(), u.len())?;
        check_len(self.n(), w.len())?;
        check_finite("rank-one u", &u)?;
        check_finite("rank-one w", &w)?;
        let mut out = self.clone();
        out.rank_one.push(RankOne { u, w });
        Ok(out)
    }

    pub fn entry(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.n();
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange { i, j, n });
        }
        let gram = self.features.row(i).dot(&self.features.row(j));
        let low_rank: f64 = self.rank_one.iter().map(|t| t.u[i] * t.w[j]).sum();
        Ok(self.left[i] * gram * self.right[j] + low_rank)
    }

    /// Dense materialization, refused above [`DENSE_CAP`].
    pub fn to_dense(&self) -> Result<Array2<f64>> {
        let n = self.n();
        if n > DENSE_CAP {
            return Err(Error::Capacity(format!(
                "dense materialization of n = {n} exceeds cap {DENSE_CAP}"
            )));
        }
        let mut dense = self.features.dot(&self.features.t());
        for ((i, j), v) in dense.indexed_iter_mut() {
            *v *= self.left[i] * self.right[j];
        }
        for t in &self.rank_one {
            for ((i, j), v) in dense.indexed_iter_mut() {
                *v += t.u[i] * t.w[j];
            }
        }
        Ok(dense)
    }

    pub fn to_container(&self) -> CouplingContainer {
        let (n, r) = self.features.dim();
        let mut v = Vec::with_capacity(n * r);
        for k in 0..r {
            v.extend(self.features.column(k).iter());
        }
        CouplingContainer {
            n,
            r,
            t: self.rank_one.len(),
            v,
            left_scale: self.left.to_vec(),
            right_scale: self.right.to_vec(),
            rank_one_terms: self
                .rank_one
                .iter()
                .map(|t| RankOneRecord {
                    u: t.u.to_vec(),
                    w: t.w.to_vec(),
                })
                .collect(),
        }
    }

    pub fn from_container(c: CouplingContainer) -> Result<Self> {
        let CouplingContainer {
            n,
            r,
            t,
            v,
            left_scale,
            right_scale,
            rank_one_terms,
        } = c;
        check_len(n * r, v.len())?;
        check_len(t, rank_one_terms.len())?;
        // Stored row-major r × n; transpose into n × r.
        let features = Array2::from_shape_vec((r, n), v)
            .map_err(|e| Error::InvalidInput(e.to_string()))?
            .reversed_axes()
            .as_standard_layout()
            .into_owned();
        Self::new(
            Arc::new(features),
            Array1::from(left_scale),
            Array1::from(right_scale),
            rank_one_terms
                .into_iter()
                .map(|t| RankOne {
                    u: Array1::from(t.u),
                    w: Array1::from(t.w),
                })
                .collect(),
        )
    }
}

/// Serialized factored matrix. `V` is row-major `r × n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CouplingContainer {
    pub n: usize,
    pub r: usize,
    pub t: usize,
    #[serde(rename = "V")]
    pub v: Vec<f64>,
    pub left_scale: Vec<f64>,
    pub right_scale: Vec<f64>,
    pub rank_one_terms: Vec<RankOneRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneRecord {
    pub u: Vec<f64>,
    pub w: Vec<f64>,
}

/// `out ← outer ⊙ (Vᵀ(V(inner ⊙ z)))` in the `n × r` storage, with
/// compensated accumulation of the length-`n` reductions.
fn gram_apply(
    features: &Array2<f64>,
    inner: &Array1<f64>,
    outer: &Array1<f64>,
    z: &[f64],
    out: &mut [f64],
    scratch: &mut MatvecScratch,
) {
    let r = features.ncols();
    scratch.sum.clear();
    scratch.sum.resize(r, 0.0);
    scratch.comp.clear();
    scratch.comp.resize(r, 0.0);
    let (sum, comp) = (&mut scratch.sum[..], &mut scratch.comp[..]);
    for ((row, &s), &zj) in features.rows().into_iter().zip(inner).zip(z) {
        let weight = s * zj;
        if weight == 0.0 {
            continue;
        }
        for ((acc, c), &v) in sum.iter_mut().zip(comp.iter_mut()).zip(row) {
            let term = v * weight;
            let t = *acc + term;
            if acc.abs() >= term.abs() {
                *c += (*acc - t) + term;
            } else {
                *c += (term - t) + *acc;
            }
            *acc = t;
        }
    }
    for (acc, c) in sum.iter_mut().zip(comp.iter()) {
        *acc += c;
    }
    for ((o, row), &s) in out.iter_mut().zip(features.rows()).zip(outer) {
        *o = s * dot(row.as_slice().unwrap(), sum);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_positive(s: &[f64]) -> Result<()> {
    match s.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        Some(i) => Err(Error::InvalidInput(format!(
            "scale entry {i} is {}, expected positive and finite",
            s[i]
        ))),
        None => Ok(()),
    }
}

fn check_nonnegative<'a>(what: &str, s: impl IntoIterator<Item = &'a f64>) -> Result<()> {
    match s.into_iter().position(|&v| !(v >= 0.0 && v.is_finite())) {
        Some(i) => Err(Error::InvalidInput(format!(
            "{what} entry {i} is negative or not finite"
        ))),
        None => Ok(()),
    }
}

fn check_finite<'a>(what: &str, s: impl IntoIterator<Item = &'a f64>) -> Result<()> {
    match s.into_iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidInput(format!("{what} entry {i} is not finite"))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_factored(rng: &mut ChaCha8Rng, n: usize, r: usize, t: usize) -> FactoredMatrix {
        let features = Array2::from_shape_fn((n, r), |_| rng.random_range(-1.0..1.0));
        let left = Array1::from_shape_fn(n, |_| rng.random_range(0.1..2.0));
        let right = Array1::from_shape_fn(n, |_| rng.random_range(0.1..2.0));
        let terms = (0..t)
            .map(|_| RankOne {
                u: Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0)),
                w: Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0)),
            })
            .collect();
        FactoredMatrix::new(Arc::new(features), left, right, terms).unwrap()
    }

    fn max_abs_diff(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
        (a - b).fold(0.0f64, |m, v| m.max(v.abs()))
    }

    #[test]
    fn zero_vector_maps_to_zero() {
        let a = FactoredMatrix::from_features(Arc::new(array![[1.0, 2.0], [0.5, 0.1]]));
        assert_eq!(a.matvec(&[0.0, 0.0]).unwrap(), array![0.0, 0.0]);
    }

    #[test]
    fn all_ones_gram_on_unit_vector() {
        let a = FactoredMatrix::from_features(Arc::new(array![[1.0], [1.0]]));
        assert_eq!(a.matvec(&[1.0, 0.0]).unwrap(), array![1.0, 1.0]);
        assert_eq!(a.to_dense().unwrap(), array![[1.0, 1.0], [1.0, 1.0]]);
    }

    #[test]
    fn dimension_mismatch() {
        let a = FactoredMatrix::zeros(3);
        assert!(matches!(a.matvec(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(a.matvec_transpose(&[1.0; 4]).is_err());
        assert!(a.add_rank_one(Array1::zeros(2), Array1::zeros(3)).is_err());
    }

    #[test]
    fn transpose_of_symmetric_gram_equals_matvec() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let features = Array2::from_shape_fn((5, 3), |_| rng.random_range(-1.0..1.0));
        let s = Array1::from_shape_fn(5, |_| rng.random_range(0.5..1.5));
        let a = FactoredMatrix::new(Arc::new(features), s.clone(), s, vec![]).unwrap();
        let z: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        assert!(max_abs_diff(&a.matvec(&z).unwrap(), &a.matvec_transpose(&z).unwrap()) < 1e-14);
    }

    #[test]
    fn transpose_of_pure_rank_one() {
        let u = array![1.0, 2.0, 3.0];
        let w = array![0.5, -1.0, 4.0];
        let a = FactoredMatrix::zeros(3).add_rank_one(u.clone(), w.clone()).unwrap();
        let z = [1.0, 1.0, -1.0];
        let uz: f64 = u.iter().zip(&z).map(|(a, b)| a * b).sum();
        assert_eq!(a.matvec_transpose(&z).unwrap(), &w * uz);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a.entry(i, j).unwrap(), u[i] * w[j]);
            }
        }
    }

    #[test]
    fn row_sums_of_all_ones_gram() {
        let a = FactoredMatrix::from_features(Arc::new(Array2::ones((3, 1))));
        assert_eq!(a.row_sums(), array![3.0, 3.0, 3.0]);
        assert_eq!(a.col_sums(), array![3.0, 3.0, 3.0]);
    }

    #[test]
    fn entry_of_scaled_all_ones_gram() {
        let left = array![1.0, 2.0];
        let right = array![3.0, 5.0];
        let a = FactoredMatrix::new(Arc::new(Array2::ones((2, 1))), left.clone(), right.clone(), vec![])
            .unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(a.entry(i, j).unwrap(), left[i] * right[j]);
            }
        }
        assert!(a.entry(2, 0).is_err());
    }

    #[test]
    fn zero_factorization_dense_is_zero() {
        assert_eq!(FactoredMatrix::zeros(4).to_dense().unwrap(), Array2::<f64>::zeros((4, 4)));
    }

    #[test]
    fn to_dense_cap() {
        let a = FactoredMatrix::zeros(DENSE_CAP + 1);
        assert!(matches!(a.to_dense(), Err(Error::Capacity(_))));
    }

    #[test]
    fn unit_scaling_and_zero_rank_one_are_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_factored(&mut rng, 6, 3, 1);
        let b = a.scale_rows(&[1.0; 6]).unwrap().scale_cols(&[1.0; 6]).unwrap();
        assert_eq!(a.to_dense().unwrap(), b.to_dense().unwrap());
        let c = a.add_rank_one(Array1::zeros(6), Array1::ones(6)).unwrap();
        assert_eq!(a.to_dense().unwrap(), c.to_dense().unwrap());
    }

    #[test]
    fn scale_rows_is_linear_in_row_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_factored(&mut rng, 7, 2, 2);
        let s: Vec<f64> = (0..7).map(|_| rng.random_range(0.2..3.0)).collect();
        let scaled = a.scale_rows(&s).unwrap();
        let expected = &a.row_sums() * &Array1::from(s);
        assert!(max_abs_diff(&scaled.row_sums(), &expected) < 1e-12);
    }

    #[test]
    fn scale_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_factored(&mut rng, 8, 3, 2);
        let s: Vec<f64> = (0..8).map(|_| rng.random_range(0.2..3.0)).collect();
        let inv: Vec<f64> = s.iter().map(|v| 1.0 / v).collect();
        let back = a.scale_rows(&s).unwrap().scale_rows(&inv).unwrap();
        let (x, y) = (a.to_dense().unwrap(), back.to_dense().unwrap());
        assert!((&x - &y).fold(0.0f64, |m, v| m.max(v.abs())) < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_scales() {
        let a = FactoredMatrix::zeros(2);
        assert!(a.scale_rows(&[1.0, 0.0]).is_err());
        assert!(a.scale_cols(&[-1.0, 1.0]).is_err());
        assert!(a.scale_cols(&[f64::INFINITY, 1.0]).is_err());
        assert!(a.scale_rows_nonneg(&[0.0, 1.0]).is_ok());
    }

    #[test]
    fn container_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_factored(&mut rng, 5, 3, 2);
        let json = serde_json::to_string(&a.to_container()).unwrap();
        assert!(json.contains("\"V\"") && json.contains("\"leftScale\"") && json.contains("\"rankOneTerms\""));
        let back = FactoredMatrix::from_container(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.to_container(), a.to_container());
        let mut bad = a.to_container();
        bad.v.pop();
        assert!(FactoredMatrix::from_container(bad).is_err());
    }

    #[test]
    fn matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_factored(&mut rng, 6, 3, 1);
        let dense = a.to_dense().unwrap();
        let z: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let zz = Array1::from(z.clone());
        assert!(max_abs_diff(&a.matvec(&z).unwrap(), &dense.dot(&zz)) < 1e-12);
        assert!(max_abs_diff(&a.matvec_transpose(&z).unwrap(), &dense.t().dot(&zz)) < 1e-12);
        for i in 0..6 {
            for j in 0..6 {
                assert!((a.entry(i, j).unwrap() - dense[[i, j]]).abs() < 1e-14);
            }
        }
    }
}
