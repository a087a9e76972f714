fn main() {
    std::process::exit(trailaug_cli::main_with_args(std::env::args_os()));
}
