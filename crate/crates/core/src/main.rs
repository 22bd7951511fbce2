fn main() {
    std::process::exit(steinhaus::cli::run_cli(std::env::args_os()));
}
