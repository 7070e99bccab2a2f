// Solve a small transport LP exactly and check the duality certificate.

use lowrank_ot::exact::{certify, exact_ot};
use lowrank_ot::geometry::pairwise_sq_distances;
use lowrank_ot::{PointCloud, SimplexVector};

pub fn run_example() -> lowrank_ot::Result<()> {
    let cloud = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 1.0]])?;
    let cost = pairwise_sq_distances(&cloud);
    let p = SimplexVector::new(vec![0.4, 0.4, 0.2, 0.0])?;
    let q = SimplexVector::new(vec![0.0, 0.25, 0.25, 0.5])?;

    let sol = exact_ot(&cost, &p, &q)?;
    let cert = certify(&sol, &cost, &p, &q);
    println!("W2^2 = {:.6}", sol.cost);
    println!("plan:\n{:.3}", sol.plan);
    println!(
        "primal residual {:.1e}, dual violation {:.1e}, gap {:.1e}",
        cert.primal_residual, cert.dual_violation, cert.duality_gap
    );
    assert!(cert.holds(sol.cost));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
