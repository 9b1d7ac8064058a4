fn main() {
    std::process::exit(secnoma::cli::main_with_args(std::env::args_os()));
}
