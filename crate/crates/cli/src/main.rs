fn main() {
    std::process::exit(sac_cli::main_with_args(std::env::args_os()));
}
