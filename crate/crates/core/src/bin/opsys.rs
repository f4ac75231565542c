fn main() {
    std::process::exit(opsys_toolkit::cli::main_with_args(std::env::args_os()));
}
