fn main() {
    std::process::exit(comi::cli::main_with_args(std::env::args_os()));
}
