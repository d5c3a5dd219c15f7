fn main() {
    std::process::exit(itoext_cli::main_with_args(std::env::args_os()));
}
