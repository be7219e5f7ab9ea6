fn main() {
    std::process::exit(ginv::cli::run_cli(std::env::args_os()));
}
