fn main() {
    std::process::exit(mtm_sde::cli::main_with_args(std::env::args_os()));
}
