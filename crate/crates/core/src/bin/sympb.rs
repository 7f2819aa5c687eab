fn main() {
    std::process::exit(sympb::cli::main_with_args(std::env::args_os()));
}
