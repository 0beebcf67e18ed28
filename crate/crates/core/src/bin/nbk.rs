fn main() {
    std::process::exit(nbk::cli::run(std::env::args_os()));
}
