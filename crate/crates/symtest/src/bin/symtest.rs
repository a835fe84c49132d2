fn main() {
    std::process::exit(symtest::cli::run(std::env::args_os()));
}
