fn main() {
    std::process::exit(semiham_cli::main_with_args(std::env::args_os().collect()));
}
