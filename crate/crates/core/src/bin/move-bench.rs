fn main() {
    std::process::exit(move_bench::cli::main_with_args(std::env::args_os()));
}
