fn main() {
    std::process::exit(kll_cli::main_with_args(std::env::args_os().skip(1)));
}
