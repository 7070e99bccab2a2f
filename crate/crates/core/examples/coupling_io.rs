// Write an instance file, solve it, save the factored coupling and reload it.

use lowrank_ot::cli::{format_instance, load_coupling, read_instance, save_coupling, synthetic_instance};
use lowrank_ot::simplex::l1_distance;
use lowrank_ot::{approx_w2, Mode};

pub fn run_example() -> lowrank_ot::Result<()> {
    let dir = std::env::temp_dir().join(format!("lowrank-ot-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let instance_path = dir.join("instance.txt");
    let coupling_path = dir.join("coupling.json");

    std::fs::write(&instance_path, format_instance(&synthetic_instance(12, 2, 42)?))?;
    let inst = read_instance(&instance_path)?;
    let result = approx_w2(&inst.cloud, &inst.p, &inst.q, 0.9, Mode::Engineering { eta: 5.0, order: 45 })?;
    save_coupling(&result.coupling, &coupling_path)?;

    let reloaded = load_coupling(&coupling_path)?;
    let row_err = l1_distance(reloaded.row_sums().as_slice().unwrap(), inst.p.as_slice());
    let col_err = l1_distance(reloaded.col_sums().as_slice().unwrap(), inst.q.as_slice());
    println!(
        "rank {}  rank-one terms {}  file {} bytes",
        reloaded.rank(),
        reloaded.num_rank_one(),
        std::fs::metadata(&coupling_path)?.len()
    );
    println!("W2^2 ~ {:.6}  marginal errors {row_err:.1e} / {col_err:.1e}", result.w_hat);
    assert!(row_err <= 1e-8 && col_err <= 1e-8);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
