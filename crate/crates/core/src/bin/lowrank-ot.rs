fn main() {
    std::process::exit(lowrank_ot::cli::run(std::env::args_os()));
}
