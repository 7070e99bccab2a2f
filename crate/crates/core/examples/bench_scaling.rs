// Time the solver on growing synthetic instances with fixed (eta, M).

use lowrank_ot::cli::{cmd_bench, BenchArgs, ModeArg, ModeArgs, BENCH_HEADER};

pub fn run_example() -> lowrank_ot::Result<()> {
    let args = BenchArgs {
        sizes: vec![1000, 2000, 4000],
        d: 1,
        epsilon: 0.1,
        reps: 3,
        seed: 7,
        mode: ModeArgs {
            mode: ModeArg::Engineering,
            eta: Some(5.0),
            order: Some(45),
        },
    };
    let rows = cmd_bench(&args)?;
    println!("{BENCH_HEADER}");
    for row in &rows {
        println!("{}", row.csv());
    }
    for pair in rows.windows(2) {
        println!(
            "n {} -> {}: time ratio {:.2}",
            pair[0].n,
            pair[1].n,
            pair[1].timings.total / pair[0].timings.total
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
