//! Truncated Taylor features for the Gaussian kernel.
//!
//! For bandwidth `σ`, expanding `exp(⟨x, y⟩/σ²)` to total degree `M - 1` and
//! splitting each multinomial coefficient evenly between the two arguments
//! gives one feature per multi-index `v` with `|v| ≤ M - 1`:
//!
//! ```text
//! ψᵥ(x; σ) = exp(-‖x‖²/(2σ²)) · ∏ⱼ xⱼ^vⱼ / (σ^|v| · √(∏ⱼ vⱼ!))
//! ```
//!
//! so that `Σᵥ ψᵥ(x)ψᵥ(y) ≈ exp(-‖x - y‖²/(2σ²))`. For points in the unit ball
//! the entrywise error is at most `1/(M!·σ^{2M})`.

use std::collections::HashMap;
use std::sync::Arc;

use ndarray::{Array2, ArrayView1};

use crate::geometry::PointCloud;
use crate::{Error, Result};

/// Exponent tuple of one monomial feature.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub exponents: Vec<u32>,
}

impl MultiIndex {
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// `ln(m!)` by direct summation.
pub fn ln_factorial(m: u64) -> f64 {
    (2..=m).map(|k| (k as f64).ln()).sum()
}

/// Number of features `C(M - 1 + d, d)` for dimension `d` and order `M`.
pub fn feature_rank(d: usize, order: usize) -> Result<usize> {
    if d == 0 || order == 0 {
        return Err(Error::InvalidInput(format!(
            "dimension and order must be positive, got d = {d}, M = {order}"
        )));
    }
    let mut count: u128 = 1;
    for k in 1..=d as u128 {
        count = count
            .checked_mul(order as u128 - 1 + k)
            .map(|c| c / k)
            .filter(|&c| c <= usize::MAX as u128)
            .ok_or_else(|| {
                Error::Capacity(format!(
                    "rank C({}, {d}) does not fit in memory indices",
                    order - 1 + d
                ))
            })?;
    }
    Ok(count as usize)
}

/// Upper bound `1/(M!·σ^{2M})` on `‖K - VᵀV‖∞` for points in the unit ball.
pub fn taylor_error_bound(sigma: f64, order: usize) -> f64 {
    (-ln_factorial(order as u64) - 2.0 * order as f64 * sigma.ln()).exp()
}

/// All multi-indices of total degree at most `order - 1`, graded by degree
/// and in descending lexicographic order within a degree.
pub fn enumerate_multi_indices(d: usize, order: usize) -> Result<Vec<MultiIndex>> {
    let rank = feature_rank(d, order)?;
    let mut out = Vec::new();
    out.try_reserve_exact(rank)
        .map_err(|_| Error::Capacity(format!("cannot allocate {rank} multi-indices")))?;
    let mut scratch = vec![0u32; d];
    for degree in 0..order as u32 {
        compositions(degree, 0, &mut scratch, &mut out);
    }
    debug_assert_eq!(out.len(), rank);
    Ok(out)
}

fn compositions(remaining: u32, pos: usize, scratch: &mut [u32], out: &mut Vec<MultiIndex>) {
    if pos + 1 == scratch.len() {
        scratch[pos] = remaining;
        out.push(MultiIndex {
            exponents: scratch.to_vec(),
        });
        return;
    }
    for head in (0..=remaining).rev() {
        scratch[pos] = head;
        compositions(remaining - head, pos + 1, scratch, out);
    }
}

/// Closed-form evaluation of `Φ_M(x; σ)` over the given indices.
///
/// Magnitudes are assembled in log space, independently of the incremental
/// recurrence used by [`taylor_gkm`].
pub fn feature_vector(
    x: ArrayView1<'_, f64>,
    sigma: f64,
    order: usize,
    indices: &[MultiIndex],
) -> Result<Vec<f64>> {
    check_sigma(sigma)?;
    let sq_norm = x.dot(&x);
    let mut out = Vec::with_capacity(indices.len());
    for idx in indices {
        crate::check_len(x.len(), idx.exponents.len())?;
        if idx.degree() as usize >= order {
            return Err(Error::InvalidInput(format!(
                "multi-index of degree {} exceeds order {order}",
                idx.degree()
            )));
        }
        let mut log_mag = -sq_norm / (2.0 * sigma * sigma) - idx.degree() as f64 * sigma.ln();
        let mut negative = false;
        let mut zero = false;
        for (&xj, &vj) in x.iter().zip(&idx.exponents) {
            if vj == 0 {
                continue;
            }
            if xj == 0.0 {
                zero = true;
                break;
            }
            log_mag += vj as f64 * xj.abs().ln() - 0.5 * ln_factorial(vj as u64);
            negative ^= xj < 0.0 && vj % 2 == 1;
        }
        out.push(match (zero, negative) {
            (true, _) => 0.0,
            (false, false) => log_mag.exp(),
            (false, true) => -log_mag.exp(),
        });
    }
    Ok(out)
}

/// Feature matrix `V` with one contiguous feature vector per point.
///
/// Stored as an `n × r` array whose row `i` is `Φ_M(xᵢ; σ)`, which is the
/// column-major layout of the `r × n` matrix `V`.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    features: Arc<Array2<f64>>,
    pub sigma: f64,
    pub order: usize,
}

impl FeatureMatrix {
    pub fn rank(&self) -> usize {
        self.features.ncols()
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.nrows() == 0
    }

    pub fn features(&self) -> &Arc<Array2<f64>> {
        &self.features
    }

    /// `(VᵀV)ᵢⱼ`.
    pub fn gram_entry(&self, i: usize, j: usize) -> f64 {
        self.features.row(i).dot(&self.features.row(j))
    }

    /// Dense `VᵀV`; test and verification use only.
    pub fn gram_dense(&self) -> Array2<f64> {
        self.features.dot(&self.features.t())
    }
}

/// Builds the Taylor feature matrix of a cloud lying in the unit ball.
///
/// Each degree-`k` feature is its degree-`(k-1)` parent times one coordinate
/// over `σ√vⱼ`, so construction costs `O(n·r)`.
pub fn taylor_gkm(cloud: &PointCloud, sigma: f64, order: usize) -> Result<FeatureMatrix> {
    check_sigma(sigma)?;
    if let Some(i) = (0..cloud.len()).find(|&i| {
        let x = cloud.point(i);
        x.dot(&x) > 1.0 + 1e-12
    }) {
        return Err(Error::Precondition(format!(
            "point {i} lies outside the unit ball"
        )));
    }
    let indices = enumerate_multi_indices(cloud.dim(), order)?;
    let steps = recurrence_steps(&indices, sigma);
    let (n, r) = (cloud.len(), indices.len());
    let total = n.checked_mul(r).ok_or_else(|| {
        Error::Capacity(format!("{n} x {r} feature matrix overflows"))
    })?;
    let mut data = Vec::new();
    data.try_reserve_exact(total)
        .map_err(|_| Error::Capacity(format!("cannot allocate {n} x {r} feature matrix")))?;
    data.resize(total, 0.0);
    let inv_two_var = 1.0 / (2.0 * sigma * sigma);
    for (i, row) in data.chunks_exact_mut(r).enumerate() {
        let x = cloud.point(i);
        row[0] = (-x.dot(&x) * inv_two_var).exp();
        for (k, step) in steps.iter().enumerate() {
            row[k + 1] = row[step.parent] * x[step.coord] * step.factor;
        }
    }
    let features = Array2::from_shape_vec((n, r), data)
        .map_err(|e| Error::Inconsistent(e.to_string()))?;
    Ok(FeatureMatrix {
        features: Arc::new(features),
        sigma,
        order,
    })
}

struct Step {
    parent: usize,
    coord: usize,
    factor: f64,
}

/// For every non-constant index: its parent position, the coordinate that was
/// incremented, and the multiplier `1/(σ√vⱼ)`.
fn recurrence_steps(indices: &[MultiIndex], sigma: f64) -> Vec<Step> {
    let position: HashMap<&[u32], usize> = indices
        .iter()
        .enumerate()
        .map(|(k, idx)| (idx.exponents.as_slice(), k))
        .collect();
    let mut parent = Vec::new();
    indices
        .iter()
        .skip(1)
        .map(|idx| {
            let coord = idx.exponents.iter().position(|&v| v > 0).unwrap();
            parent.clear();
            parent.extend_from_slice(&idx.exponents);
            parent[coord] -= 1;
            Step {
                parent: position[parent.as_slice()],
                coord,
                factor: 1.0 / (sigma * (idx.exponents[coord] as f64).sqrt()),
            }
        })
        .collect()
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "bandwidth must be positive and finite, got {sigma}"
        )))
    }
}
