fn main() {
    std::process::exit(discode_cli::run_from(std::env::args_os()));
}
