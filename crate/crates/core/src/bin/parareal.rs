fn main() {
    std::process::exit(parareal::cli::main_with_args(std::env::args_os()));
}
