// Round an almost-feasible factored matrix onto the transport polytope.

use std::sync::Arc;

use lowrank_ot::simplex::l1_distance;
use lowrank_ot::{round_to_polytope, FactoredMatrix, SimplexVector};
use ndarray::{Array1, Array2};

pub fn run_example() -> lowrank_ot::Result<()> {
    // diag(1/2, 1/2) written as D1 (I I^T) D2.
    let f = FactoredMatrix::new(
        Arc::new(Array2::eye(2)),
        Array1::from(vec![0.5, 0.5]),
        Array1::ones(2),
        vec![],
    )?;
    let p = SimplexVector::new(vec![0.75, 0.25])?;
    let q = SimplexVector::new(vec![0.5, 0.5])?;

    let (g, report) = round_to_polytope(&f, &p, &q)?;
    let dense = g.to_dense()?;
    println!("rounded:\n{dense}");
    println!("l1 moved {}  rank-one terms {}", report.l1_moved, g.num_rank_one());
    assert_eq!(dense, ndarray::array![[0.5, 0.25], [0.0, 0.25]]);

    let rows = g.row_sums();
    let cols = g.col_sums();
    println!(
        "row error {:.1e}  column error {:.1e}",
        l1_distance(rows.as_slice().unwrap(), p.as_slice()),
        l1_distance(cols.as_slice().unwrap(), q.as_slice())
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
