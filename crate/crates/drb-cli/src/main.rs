fn main() {
    std::process::exit(drb_cli::main_with_args(std::env::args_os()));
}
