fn main() {
    std::process::exit(torus_tails::cli::main_with_args(std::env::args_os()));
}
