fn main() {
    std::process::exit(ldg::cli::main_with_args(std::env::args_os()));
}
