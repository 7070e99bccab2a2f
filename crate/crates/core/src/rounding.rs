//! Rounding a nonnegative unit-mass matrix onto the transport polytope
//! `𝓜(p, q)` while keeping it factored.
//!
//! Rows whose mass exceeds `pᵢ` are scaled down, then columns whose mass
//! exceeds `qⱼ`; the missing mass is restored by a single rank-one term
//! `err_r err_cᵀ / ‖err_r‖₁`. The result moves at most
//! `‖F𝟙 - p‖₁ + ‖Fᵀ𝟙 - q‖₁` in ℓ1.

use ndarray::Array1;

use crate::factored::FactoredMatrix;
use crate::simplex::SimplexVector;
use crate::{check_len, Error, Result};

/// Allowed deviation of `‖F‖₁` from one.
pub const MASS_TOLERANCE: f64 = 1e-8;
/// Residual entries above `-RESIDUAL_TOLERANCE` are treated as roundoff.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingReport {
    /// Upper bound on `‖G - F‖₁`: mass removed plus mass added back.
    pub l1_moved: f64,
    /// `Δ = ‖F‖₁ - ‖F''‖₁`.
    pub mass_removed: f64,
    pub rank_one_added: bool,
}

pub fn round_to_polytope(
    f: &FactoredMatrix,
    p: &SimplexVector,
    q: &SimplexVector,
) -> Result<(FactoredMatrix, RoundingReport)> {
    let n = f.n();
    check_len(n, p.len())?;
    check_len(n, q.len())?;
    let rows = f.row_sums();
    let mass = rows.sum();
    if (mass - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::Precondition(format!(
            "matrix to round has total mass {mass}, expected 1"
        )));
    }

    let x = shrink_factors(p.as_slice(), &rows);
    let f1 = f.scale_rows_nonneg(&x)?;
    let cols = f1.col_sums();
    let y = shrink_factors(q.as_slice(), &cols);
    let f2 = f1.scale_cols_nonneg(&y)?;

    let err_r = residual(p.as_slice(), &f2.row_sums(), "row")?;
    let err_c = residual(q.as_slice(), &f2.col_sums(), "column")?;
    let (mass_r, mass_c) = (err_r.sum(), err_c.sum());
    if (mass_r - mass_c).abs() > RESIDUAL_TOLERANCE {
        return Err(Error::Inconsistent(format!(
            "row residual mass {mass_r} differs from column residual mass {mass_c}"
        )));
    }
    let mass_removed = mass - f2.total_mass();

    let (g, added) = if mass_r > 0.0 {
        let divisor = 0.5 * (mass_r + mass_c);
        (f2.add_rank_one(err_r / divisor, err_c)?, true)
    } else {
        (f2, false)
    };
    Ok((
        g,
        RoundingReport {
            l1_moved: mass_removed + mass_r,
            mass_removed,
            rank_one_added: added,
        },
    ))
}

/// `min(targetᵢ / sumᵢ, 1)`, with zero-sum entries left untouched.
fn shrink_factors(target: &[f64], sums: &Array1<f64>) -> Vec<f64> {
    target
        .iter()
        .zip(sums)
        .map(|(&t, &s)| if s > t { t / s } else { 1.0 })
        .collect()
}

fn residual(target: &[f64], sums: &Array1<f64>, what: &str) -> Result<Array1<f64>> {
    target
        .iter()
        .zip(sums)
        .enumerate()
        .map(|(i, (&t, &s))| {
            let e = t - s;
            if e < -RESIDUAL_TOLERANCE {
                Err(Error::Precondition(format!(
                    "{what} residual {e:e} at index {i} is negative; input is not nonnegative"
                )))
            } else {
                Ok(e.max(0.0))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::dense_round;
    use ndarray::{array, Array2};
    use std::sync::Arc;

    /// Exact factorization of a diagonal matrix through unit-vector features.
    fn diagonal(weights: &[f64]) -> FactoredMatrix {
        let n = weights.len();
        let features = Array2::from_shape_fn((n, n), |(i, k)| if i == k { 1.0 } else { 0.0 });
        FactoredMatrix::new(
            Arc::new(features),
            Array1::from(weights.to_vec()),
            Array1::ones(n),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn worked_two_by_two() {
        let f = diagonal(&[0.5, 0.5]);
        let p = SimplexVector::new(vec![0.75, 0.25]).unwrap();
        let q = SimplexVector::new(vec![0.5, 0.5]).unwrap();
        let (g, report) = round_to_polytope(&f, &p, &q).unwrap();
        assert_eq!(g.to_dense().unwrap(), array![[0.5, 0.25], [0.0, 0.25]]);
        assert!(report.rank_one_added);
        assert_eq!(report.mass_removed, 0.25);
        assert_eq!(report.l1_moved, 0.5);
        let dense = dense_round(&f.to_dense().unwrap(), &p, &q).unwrap();
        assert_eq!(dense, array![[0.5, 0.25], [0.0, 0.25]]);
    }

    #[test]
    fn feasible_input_is_fixed_point() {
        let f = diagonal(&[0.3, 0.7]);
        let p = SimplexVector::new(vec![0.3, 0.7]).unwrap();
        let (g, report) = round_to_polytope(&f, &p, &p).unwrap();
        assert!(!report.rank_one_added);
        assert_eq!(g.num_rank_one(), 0);
        assert_eq!(report.l1_moved, 0.0);
        assert_eq!(g.to_dense().unwrap(), f.to_dense().unwrap());
    }

    #[test]
    fn dirac_marginals_zero_rows() {
        let n = 3;
        let f = FactoredMatrix::new(
            Arc::new(Array2::ones((n, 1))),
            Array1::from_elem(n, 1.0 / 3.0),
            Array1::from_elem(n, 1.0 / 3.0),
            vec![],
        )
        .unwrap();
        let p = SimplexVector::dirac(n, 0).unwrap();
        let q = SimplexVector::dirac(n, 2).unwrap();
        let (g, _) = round_to_polytope(&f, &p, &q).unwrap();
        let dense = g.to_dense().unwrap();
        for ((i, j), v) in dense.indexed_iter() {
            let expected = if (i, j) == (0, 2) { 1.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-15, "({i},{j}) = {v}");
        }
    }

    #[test]
    fn rejects_bad_mass() {
        let f = diagonal(&[0.5, 0.6]);
        let p = SimplexVector::uniform(2).unwrap();
        assert!(matches!(round_to_polytope(&f, &p, &p), Err(Error::Precondition(_))));
        let short = SimplexVector::uniform(3).unwrap();
        assert!(round_to_polytope(&f, &short, &short).is_err());
    }
}
