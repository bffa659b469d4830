fn main() {
    std::process::exit(flm_core::cli::main_with_args(std::env::args_os()));
}
