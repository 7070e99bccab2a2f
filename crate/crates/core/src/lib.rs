//! # lowrank-ot
//!
//! Additive approximation of the squared 2-Wasserstein distance between two
//! discrete distributions supported on a shared point cloud, in time nearly
//! linear in the number of points.
//!
//! The pipeline never forms an `n × n` matrix:
//!
//! 1. [`geometry::normalize`] moves the cloud into a ball of radius ½ so every
//!    squared distance is at most 1.
//! 2. [`kernel_features::taylor_gkm`] builds explicit Taylor features `V` with
//!    `VᵀV ≈ exp(-η‖xᵢ - xⱼ‖²)`.
//! 3. [`sinkhorn::sinkhorn_scale`] scales `VᵀV` towards the marginals using only
//!    matrix-vector products against the [`factored::FactoredMatrix`].
//! 4. [`rounding::round_to_polytope`] repairs the residual marginal error with
//!    one rank-one correction, giving an exactly feasible coupling.
//! 5. [`solver::coupling_cost`] evaluates `⟨P, C⟩` through the factorization.
//!
//! [`solver::approx_w2`] runs the whole thing. [`exact`] holds a network-simplex
//! solver and dense mirrors of every factored routine for verification.
//!
//! ```rust
//! use lowrank_ot::{approx_w2, Mode, PointCloud, SimplexVector};
//!
//! let cloud = PointCloud::from_rows(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
//! let p = SimplexVector::new(vec![0.5, 0.5, 0.0]).unwrap();
//! let q = SimplexVector::new(vec![0.0, 0.5, 0.5]).unwrap();
//! let result = approx_w2(&cloud, &p, &q, 0.5, Mode::Theory).unwrap();
//! assert!(result.coupling.row_sums().iter().zip(p.as_slice()).all(|(a, b)| (a - b).abs() < 1e-9));
//! assert!(result.w_hat >= 0.0);
//! ```

pub mod cli;
pub mod exact;
pub mod factored;
pub mod geometry;
pub mod kernel_features;
pub mod rounding;
pub mod simplex;
pub mod sinkhorn;
pub mod solver;

pub use exact::{exact_ot, DenseTransportPlan};
pub use factored::FactoredMatrix;
pub use geometry::{cost_decomposition, normalize, CostDecomposition, Normalization, PointCloud};
pub use kernel_features::{enumerate_multi_indices, taylor_gkm, FeatureMatrix, MultiIndex};
pub use rounding::{round_to_polytope, RoundingReport};
pub use simplex::SimplexVector;
pub use sinkhorn::{sinkhorn_scale, SinkhornConfig, SinkhornResult};
pub use solver::{approx_w2, coupling_cost, select_params, Mode, SolverParams, TransportResult};

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index ({i}, {j}) out of range for n = {n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A requested rank or dense size does not fit the configured budget.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("numerical underflow: {what} is {value:e} at index {index}")]
    Underflow { what: &'static str, index: usize, value: f64 },

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
