fn main() {
    std::process::exit(robust_ftap_cli::run(std::env::args_os()));
}
