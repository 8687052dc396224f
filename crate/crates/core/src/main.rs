fn main() {
    std::process::exit(isoblow::cli::main_with_args(std::env::args_os()));
}
