fn main() {
    std::process::exit(multicorn_cli::cli::run(std::env::args_os()));
}
