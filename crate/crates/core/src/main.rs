fn main() {
    std::process::exit(ssclab::cli::run(std::env::args_os()));
}
