// Taylor features for the Gaussian kernel and their entrywise error.

use lowrank_ot::exact::gaussian_kernel_matrix;
use lowrank_ot::kernel_features::taylor_error_bound;
use lowrank_ot::{enumerate_multi_indices, taylor_gkm, PointCloud};

pub fn run_example() -> lowrank_ot::Result<()> {
    let indices = enumerate_multi_indices(2, 3)?;
    let listed: Vec<_> = indices.iter().map(|v| v.exponents.clone()).collect();
    println!("d = 2, M = 3 indices: {listed:?}");

    let cloud = PointCloud::from_rows(&[
        vec![0.1, 0.2],
        vec![-0.5, 0.3],
        vec![0.6, -0.6],
        vec![0.0, 0.9],
        vec![-0.7, -0.2],
    ])?;
    let sigma = 1.0;
    for order in [2, 4, 8, 12] {
        let v = taylor_gkm(&cloud, sigma, order)?;
        let exact = gaussian_kernel_matrix(&cloud, sigma);
        let err = (&v.gram_dense() - &exact).iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let bound = taylor_error_bound(sigma, order);
        println!("M = {order:2}  rank {:3}  max error {err:.2e}  bound {bound:.2e}", v.rank());
        assert!(err <= bound);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
