// Scale a factored kernel towards prescribed marginals.

use lowrank_ot::sinkhorn::scaled_kernel;
use lowrank_ot::{sinkhorn_scale, taylor_gkm, FactoredMatrix, PointCloud, SimplexVector, SinkhornConfig};

pub fn run_example() -> lowrank_ot::Result<()> {
    let n = 40;
    let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / (n - 1) as f64]).collect();
    let cloud = PointCloud::from_rows(&rows)?;
    let features = taylor_gkm(&cloud, 0.5, 30)?;
    let kernel = FactoredMatrix::from_features(features.features().clone());

    let p = SimplexVector::normalized((0..n).map(|i| 1.0 + i as f64).collect())?;
    let q = SimplexVector::normalized((0..n).map(|i| (n - i) as f64).collect())?;
    let delta = 1e-3;
    let cfg = SinkhornConfig::with_default_cap(delta, n, 1e-3)?;
    let result = sinkhorn_scale(&kernel, &p, &q, &cfg)?;

    println!("converged {} after {} half-steps", result.converged, result.iterations);
    for (k, e) in result.error_history.iter().enumerate().step_by(4) {
        println!("round {k:3}  marginal error {e:.3e}");
    }
    println!("final error vs (p, q): {:.3e}", result.marginal_error);
    assert!(result.converged && result.marginal_error <= delta);

    let plan = scaled_kernel(&kernel, &result)?;
    println!("total mass {:.12}", plan.total_mass());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
