fn main() {
    std::process::exit(eqloc::cli::main_with_args(std::env::args_os()));
}
