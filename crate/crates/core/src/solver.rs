//! End-to-end approximation of `W₂²(p, q)`.
//!
//! Parameters follow `η = 20·ln n / ε`, `M = ⌈300·ln n / ε⌉`, `σ = 1/√(2η)`
//! and Sinkhorn tolerance `δ = ε/10`. `ln` is the natural logarithm
//! throughout. All guarantees are stated for the normalized instance (points
//! in the ball of radius ½, so every squared distance is at most 1); costs
//! are also reported in the caller's units.
//!
//! The theory constants give ranks that explode for `d ≥ 2`, so an
//! engineering mode accepts explicit `(η, M)` and only checks the two facts
//! the error analysis relies on: `(2η)^M / M! ≤ ½e^{-η}` and that `½e^{-η}`
//! is a normal `f64`.

use std::time::Instant;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::factored::FactoredMatrix;
use crate::geometry::{anchor_to_orthant, cost_decomposition, normalize, CostDecomposition, Normalization, PointCloud};
use crate::kernel_features::{feature_rank, ln_factorial, taylor_gkm};
use crate::rounding::{round_to_polytope, RoundingReport};
use crate::simplex::SimplexVector;
use crate::sinkhorn::{scaled_kernel, sinkhorn_scale, SinkhornConfig};
use crate::{check_len, Error, Result};

/// Radius of the ball the solver normalizes into.
pub const SOLVER_RADIUS: f64 = 0.5;
/// Default cap on `n · r`, the number of stored feature entries (1 GiB of f64).
pub const DEFAULT_FEATURE_BUDGET: usize = 1 << 27;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum Mode {
    /// `η` and `M` from the closed-form schedule; requires `ε ∈ (0, 1)`, `n ≥ 2`.
    Theory,
    /// Caller-chosen `η` and `M`, validated against the kernel-floor premise.
    Engineering { eta: f64, order: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverParams {
    pub epsilon: f64,
    pub eta: f64,
    /// Truncation order `M`.
    pub order: usize,
    pub sigma: f64,
    pub delta: f64,
    pub rank: usize,
    pub mode: Mode,
}

/// `ln((2η)^M / M!) - ln(½e^{-η})`; the premise holds when this is `≤ 0`.
pub fn taylor_premise_margin(eta: f64, order: usize) -> f64 {
    order as f64 * (2.0 * eta).ln() - ln_factorial(order as u64) - (0.5f64.ln() - eta)
}

/// Lower bound `½e^{-η}` on every entry of the approximate kernel.
pub fn kernel_floor(eta: f64) -> f64 {
    0.5 * (-eta).exp()
}

pub fn select_params(n: usize, d: usize, epsilon: f64, mode: Mode) -> Result<SolverParams> {
    select_params_with_budget(n, d, epsilon, mode, DEFAULT_FEATURE_BUDGET)
}

pub fn select_params_with_budget(
    n: usize,
    d: usize,
    epsilon: f64,
    mode: Mode,
    budget: usize,
) -> Result<SolverParams> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidInput(format!("need n >= 1 and d >= 1, got n = {n}, d = {d}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    let (eta, order) = match mode {
        Mode::Theory => {
            if n < 2 {
                return Err(Error::InvalidInput("theory mode needs n >= 2".into()));
            }
            if epsilon >= 1.0 {
                return Err(Error::InvalidInput(format!(
                    "theory mode needs epsilon in (0, 1), got {epsilon}; use engineering mode"
                )));
            }
            let ln_n = (n as f64).ln();
            (20.0 * ln_n / epsilon, (300.0 * ln_n / epsilon).ceil() as usize)
        }
        Mode::Engineering { eta, order } => {
            if !(eta > 0.0 && eta.is_finite()) || order == 0 {
                return Err(Error::InvalidInput(format!(
                    "engineering mode needs eta > 0 and M >= 1, got eta = {eta}, M = {order}"
                )));
            }
            if epsilon > 20.0 {
                return Err(Error::InvalidInput(format!(
                    "epsilon {epsilon} gives a Sinkhorn tolerance above 2"
                )));
            }
            let margin = taylor_premise_margin(eta, order);
            if margin > 0.0 {
                return Err(Error::Precondition(format!(
                    "(2η)^M/M! exceeds ½e^(-η) for η = {eta}, M = {order} (log margin {margin:.3}); increase M"
                )));
            }
            (eta, order)
        }
    };
    if kernel_floor(eta) < f64::MIN_POSITIVE {
        return Err(Error::Precondition(format!(
            "η = {eta} makes ½e^(-η) underflow f64; reduce η (raise epsilon)"
        )));
    }
    let rank = feature_rank(d, order)?;
    if rank.checked_mul(n).is_none_or(|entries| entries > budget) {
        return Err(Error::Capacity(capacity_message(n, d, order, rank, budget, mode)));
    }
    Ok(SolverParams {
        epsilon,
        eta,
        order,
        sigma: 1.0 / (2.0 * eta).sqrt(),
        delta: epsilon / 10.0,
        rank,
        mode,
    })
}

fn capacity_message(n: usize, d: usize, order: usize, rank: usize, budget: usize, mode: Mode) -> String {
    let fits = |m: usize| feature_rank(d, m).is_ok_and(|r| r.checked_mul(n).is_some_and(|e| e <= budget));
    // Largest order that fits, by bisection (rank is increasing in M).
    let (mut lo, mut hi) = (0usize, order);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let mut msg = format!(
        "rank {rank} (M = {order}, d = {d}) times n = {n} exceeds the budget of {budget} feature entries"
    );
    match (mode, lo) {
        (_, 0) => msg.push_str("; no truncation order fits"),
        (Mode::Theory, m) => msg.push_str(&format!(
            "; largest feasible M is {m}, i.e. smallest feasible epsilon is {:.4}",
            300.0 * (n as f64).ln() / m as f64
        )),
        (Mode::Engineering { .. }, m) => {
            msg.push_str(&format!("; largest feasible M is {m}"))
        }
    }
    msg
}

/// Cloud handed to the feature map: the normalized cloud translated into the
/// nonnegative orthant when it still fits in the unit ball, otherwise the
/// normalized cloud itself. Returns the translation applied, if any.
pub fn kernel_cloud(normalized: &PointCloud) -> Result<(PointCloud, Option<Array1<f64>>)> {
    let (anchored, corner) = anchor_to_orthant(normalized)?;
    if anchored.max_norm() <= 1.0 {
        Ok((anchored, Some(corner)))
    } else {
        Ok((normalized.clone(), None))
    }
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PhaseTimings {
    pub normalize: f64,
    pub kernel: f64,
    pub sinkhorn: f64,
    pub round: f64,
    pub cost: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub rank: usize,
    pub sinkhorn_iterations: usize,
    /// Sinkhorn marginal error against the original `(p, q)` before rounding.
    pub marginal_error: f64,
    pub converged: bool,
    pub rounding: RoundingReport,
    pub timings: PhaseTimings,
}

#[derive(Debug, Clone)]
pub struct TransportResult {
    /// `Ŵ` in the caller's units.
    pub w_hat: f64,
    /// `Ŵ` for the normalized instance, where the `ε` guarantee applies.
    pub w_hat_normalized: f64,
    /// Feasible coupling `P̂ = D₁'(VᵀV)D₂' + uwᵀ`.
    pub coupling: FactoredMatrix,
    pub params: SolverParams,
    pub normalization: Normalization,
    /// Translation applied to the normalized cloud before building features.
    pub kernel_shift: Option<Array1<f64>>,
    pub diagnostics: Diagnostics,
}

/// Options beyond `(ε, mode)`.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub epsilon: f64,
    pub mode: Mode,
    pub feature_budget: usize,
    /// Overrides the default Sinkhorn half-step cap.
    pub max_sinkhorn_iterations: Option<usize>,
}

impl SolverOptions {
    pub fn new(epsilon: f64, mode: Mode) -> Self {
        Self {
            epsilon,
            mode,
            feature_budget: DEFAULT_FEATURE_BUDGET,
            max_sinkhorn_iterations: None,
        }
    }
}

pub fn approx_w2(
    cloud: &PointCloud,
    p: &SimplexVector,
    q: &SimplexVector,
    epsilon: f64,
    mode: Mode,
) -> Result<TransportResult> {
    approx_w2_with(cloud, p, q, &SolverOptions::new(epsilon, mode))
}

pub fn approx_w2_with(
    cloud: &PointCloud,
    p: &SimplexVector,
    q: &SimplexVector,
    opts: &SolverOptions,
) -> Result<TransportResult> {
    let n = cloud.len();
    check_len(n, p.len())?;
    check_len(n, q.len())?;
    let start = Instant::now();
    let mut timings = PhaseTimings::default();

    let (normalized, normalization) = normalize(cloud, SOLVER_RADIUS)?;
    let params =
        select_params_with_budget(n, cloud.dim(), opts.epsilon, opts.mode, opts.feature_budget)?;
    let (features_cloud, kernel_shift) = kernel_cloud(&normalized)?;
    timings.normalize = start.elapsed().as_secs_f64();

    let t = Instant::now();
    let features = taylor_gkm(&features_cloud, params.sigma, params.order)?;
    let kernel = FactoredMatrix::from_features(features.features().clone());
    timings.kernel = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let cfg = match opts.max_sinkhorn_iterations {
        Some(cap) => SinkhornConfig::new(params.delta, cap)?,
        None => SinkhornConfig::with_default_cap(params.delta, n, kernel_floor(params.eta))?,
    };
    let scaling = sinkhorn_scale(&kernel, p, q, &cfg)?;
    timings.sinkhorn = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (coupling, rounding) = round_to_polytope(&scaled_kernel(&kernel, &scaling)?, p, q)?;
    timings.round = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let w_hat_normalized = coupling_cost(&coupling, &cost_decomposition(&normalized))?;
    timings.cost = t.elapsed().as_secs_f64();
    timings.total = start.elapsed().as_secs_f64();

    Ok(TransportResult {
        w_hat: normalization.to_original_cost(w_hat_normalized),
        w_hat_normalized,
        coupling,
        params,
        normalization,
        kernel_shift,
        diagnostics: Diagnostics {
            rank: params.rank,
            sinkhorn_iterations: scaling.iterations,
            marginal_error: scaling.marginal_error,
            converged: scaling.converged,
            rounding,
            timings,
        },
    })
}

/// `⟨P, C⟩` through the factorization in `O(nd(r + t))`.
///
/// Uses `⟨P, C⟩ = yᵀ(P𝟙) + yᵀ(Pᵀ𝟙) - 2⟨P, XᵀX⟩`. The Gram part contributes
/// `tr((X D₁ Vᵀ)(V D₂ Xᵀ))`, each rank-one term `(Xu)ᵀ(Xw)`.
pub fn coupling_cost(coupling: &FactoredMatrix, dec: &CostDecomposition) -> Result<f64> {
    let n = dec.len();
    check_len(n, coupling.n())?;
    let y = &dec.sq_norms;
    let linear = y.dot(&coupling.row_sums()) + y.dot(&coupling.col_sums());

    let points = &dec.points; // n × d
    let features = coupling.features(); // n × r
    let left_weighted = scale_rows(points, coupling.left_scale()); // D₁ Xᵀ
    let right_weighted = scale_rows(points, coupling.right_scale()); // D₂ Xᵀ
    let a = left_weighted.t().dot(features.as_ref()); // d × r
    let b = features.t().dot(&right_weighted); // r × d
    let mut inner: f64 = (0..a.nrows()).map(|k| a.row(k).dot(&b.column(k))).sum();
    for term in coupling.rank_one_terms() {
        inner += points.t().dot(&term.u).dot(&points.t().dot(&term.w));
    }
    Ok((linear - 2.0 * inner).max(0.0))
}

fn scale_rows(m: &Array2<f64>, s: &Array1<f64>) -> Array2<f64> {
    m * &s.view().insert_axis(ndarray::Axis(1))
}
