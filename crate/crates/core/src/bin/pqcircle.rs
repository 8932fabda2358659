fn main() {
    std::process::exit(pqcircle::cli::main_with_args(std::env::args_os()));
}
