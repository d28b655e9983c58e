fn main() {
    std::process::exit(qfuca::cli::main_with_args(std::env::args_os()));
}
