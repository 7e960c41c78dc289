fn main() {
    std::process::exit(credence::cli::run(std::env::args_os()));
}
