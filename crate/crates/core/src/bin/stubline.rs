fn main() {
    std::process::exit(stubline::cli::run(std::env::args_os()));
}
