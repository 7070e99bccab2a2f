// Approximate W2^2 between two weighted clouds and compare with the exact LP.

use lowrank_ot::exact::exact_ot;
use lowrank_ot::geometry::pairwise_sq_distances;
use lowrank_ot::{approx_w2, Mode, PointCloud, SimplexVector};

pub fn run_example() -> lowrank_ot::Result<()> {
    let cloud = PointCloud::from_rows(&[
        vec![0.0],
        vec![0.4],
        vec![1.1],
        vec![1.5],
        vec![2.0],
        vec![3.2],
    ])?;
    let p = SimplexVector::new(vec![0.3, 0.3, 0.2, 0.2, 0.0, 0.0])?;
    let q = SimplexVector::new(vec![0.0, 0.0, 0.1, 0.2, 0.3, 0.4])?;

    let approx = approx_w2(&cloud, &p, &q, 0.5, Mode::Theory)?;
    let exact = exact_ot(&pairwise_sq_distances(&cloud), &p, &q)?;
    let scale2 = approx.normalization.scale.powi(2);

    println!("rank {} (M = {}, eta = {:.2})", approx.params.rank, approx.params.order, approx.params.eta);
    println!("sinkhorn half-steps {}", approx.diagnostics.sinkhorn_iterations);
    println!("approx {:.6}  exact {:.6}", approx.w_hat, exact.cost);

    // The guarantee is additive in normalized units.
    let gap = approx.w_hat_normalized - exact.cost / scale2;
    println!("normalized gap {gap:.3e} (epsilon 0.5)");
    assert!((-1e-8..=0.5).contains(&gap));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
