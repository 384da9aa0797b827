fn main() {
    std::process::exit(favlab::cli::run(std::env::args_os()));
}
