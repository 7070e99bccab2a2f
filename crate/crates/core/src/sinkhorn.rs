//! Sinkhorn matrix scaling of a factored positive kernel.
//!
//! Targets are the smoothed marginals `p' = (1 - τ)p + τ/n`, `τ = δ/8`. Rows
//! and columns are renormalized alternately until the ℓ1 marginal error
//! against `(p', q')` drops to `δ/2`; since `‖p - p'‖₁ + ‖q - q'‖₁ ≤ δ/2`, the
//! error against the original marginals is then at most `δ`.

use ndarray::Array1;

use crate::factored::{FactoredMatrix, MatvecScratch};
use crate::simplex::SimplexVector;
use crate::{check_len, Error, Result};

/// Multiplier in the default iteration cap `⌈40·δ⁻¹·ln(n/(δ·min K))⌉`.
pub const DEFAULT_CAP_CONSTANT: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornConfig {
    pub delta: f64,
    /// Cap on half-steps (one row or one column update each).
    pub max_iterations: usize,
}

impl SinkhornConfig {
    pub fn new(delta: f64, max_iterations: usize) -> Result<Self> {
        if !(delta > 0.0 && delta <= 2.0) {
            return Err(Error::InvalidInput(format!(
                "delta must lie in (0, 2], got {delta}"
            )));
        }
        if max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be at least 1".into()));
        }
        Ok(Self {
            delta,
            max_iterations,
        })
    }

    /// Config with the default cap, given a lower bound on the kernel entries.
    pub fn with_default_cap(delta: f64, n: usize, min_entry: f64) -> Result<Self> {
        Self::new(delta, default_iteration_cap(delta, n, min_entry))
    }

    pub fn tau(&self) -> f64 {
        self.delta / 8.0
    }
}

pub fn default_iteration_cap(delta: f64, n: usize, min_entry: f64) -> usize {
    let log_term = ((n.max(1) as f64) / (delta * min_entry)).ln().max(1.0);
    let cap = (DEFAULT_CAP_CONSTANT / delta * log_term).ceil();
    if cap.is_finite() && cap < usize::MAX as f64 {
        (cap as usize).max(2)
    } else {
        usize::MAX
    }
}

#[derive(Debug, Clone)]
pub struct SinkhornResult {
    pub left_scale: Array1<f64>,
    pub right_scale: Array1<f64>,
    /// Half-steps performed.
    pub iterations: usize,
    /// ℓ1 marginal error of `D₁KD₂` against the original `(p, q)`.
    pub marginal_error: f64,
    /// ℓ1 marginal error against the smoothed targets at exit.
    pub smoothed_error: f64,
    pub converged: bool,
    /// Error against the smoothed targets at the start of every round.
    pub error_history: Vec<f64>,
}

/// Mixes each marginal with the uniform distribution at weight `tau`.
pub fn smooth_marginals(
    p: &SimplexVector,
    q: &SimplexVector,
    tau: f64,
) -> Result<(SimplexVector, SimplexVector)> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidInput(format!("tau must lie in (0, 1), got {tau}")));
    }
    check_len(p.len(), q.len())?;
    let n = p.len() as f64;
    let smooth = |v: &SimplexVector| {
        SimplexVector::from_raw(v.as_slice().iter().map(|&x| (1.0 - tau) * x + tau / n).collect())
    };
    Ok((smooth(p), smooth(q)))
}

/// Scales `K` so that `D₁KD₂` has marginals within `δ` of `(p, q)`.
///
/// Starts from unit scalings and always performs at least one full round, so
/// on exit the column marginals equal `q'` and the total mass is one. The cap
/// is checked between rounds; hitting it is reported through
/// `converged = false`.
pub fn sinkhorn_scale(
    kernel: &FactoredMatrix,
    p: &SimplexVector,
    q: &SimplexVector,
    cfg: &SinkhornConfig,
) -> Result<SinkhornResult> {
    let n = kernel.n();
    check_len(n, p.len())?;
    check_len(n, q.len())?;
    let (ps, qs) = smooth_marginals(p, q, cfg.tau())?;
    let (ps, qs) = (ps.as_slice(), qs.as_slice());
    let target = cfg.delta / 2.0;

    let mut left = vec![1.0; n];
    let mut right = vec![1.0; n];
    let mut row_kernel = vec![0.0; n]; // K D₂ 𝟙
    let mut col_kernel = vec![0.0; n]; // Kᵀ D₁ 𝟙
    let mut scratch = MatvecScratch::default();

    kernel.matvec_transpose_into(&left, &mut col_kernel, &mut scratch)?;
    let mut col_error = weighted_error(&right, &col_kernel, qs);

    let mut iterations = 0;
    let mut history = Vec::new();
    let (converged, smoothed_error) = loop {
        kernel.matvec_into(&right, &mut row_kernel, &mut scratch)?;
        let err = weighted_error(&left, &row_kernel, ps) + col_error;
        history.push(err);
        if iterations > 0 && err <= target {
            break (true, err);
        }
        if iterations > 0 && iterations + 2 > cfg.max_iterations {
            break (false, err);
        }

        iterations += 1;
        update_scale(&mut left, ps, &row_kernel, "row sum")?;

        iterations += 1;
        kernel.matvec_transpose_into(&left, &mut col_kernel, &mut scratch)?;
        update_scale(&mut right, qs, &col_kernel, "column sum")?;
        col_error = weighted_error(&right, &col_kernel, qs);
    };

    let left = Array1::from(left);
    let right = Array1::from(right);
    let marginal_error = marginal_error(kernel, &left, &right, p, q)?;
    Ok(SinkhornResult {
        left_scale: left,
        right_scale: right,
        iterations,
        marginal_error,
        smoothed_error,
        converged,
        error_history: history,
    })
}

/// `‖P'𝟙 - p‖₁ + ‖P'ᵀ𝟙 - q‖₁` for `P' = diag(left)·K·diag(right)`.
pub fn marginal_error(
    kernel: &FactoredMatrix,
    left: &Array1<f64>,
    right: &Array1<f64>,
    p: &SimplexVector,
    q: &SimplexVector,
) -> Result<f64> {
    let n = kernel.n();
    check_len(n, left.len())?;
    check_len(n, right.len())?;
    check_len(n, p.len())?;
    check_len(n, q.len())?;
    let rows = kernel.matvec(right.as_slice().unwrap())?;
    let cols = kernel.matvec_transpose(left.as_slice().unwrap())?;
    Ok(weighted_error(left.as_slice().unwrap(), rows.as_slice().unwrap(), p.as_slice())
        + weighted_error(right.as_slice().unwrap(), cols.as_slice().unwrap(), q.as_slice()))
}

/// `D₁KD₂` as a factored matrix.
pub fn scaled_kernel(kernel: &FactoredMatrix, result: &SinkhornResult) -> Result<FactoredMatrix> {
    kernel
        .scale_rows(result.left_scale.as_slice().unwrap())?
        .scale_cols(result.right_scale.as_slice().unwrap())
}

fn weighted_error(scale: &[f64], sums: &[f64], target: &[f64]) -> f64 {
    scale
        .iter()
        .zip(sums)
        .zip(target)
        .map(|((s, k), t)| (s * k - t).abs())
        .sum()
}

fn update_scale(scale: &mut [f64], target: &[f64], sums: &[f64], what: &'static str) -> Result<()> {
    for (index, ((s, &t), &k)) in scale.iter_mut().zip(target).zip(sums).enumerate() {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Underflow { what, index, value: k });
        }
        *s = t / k;
        if !(*s > 0.0 && s.is_finite()) {
            return Err(Error::Underflow {
                what: "scaling factor",
                index,
                value: *s,
            });
        }
    }
    Ok(())
}
