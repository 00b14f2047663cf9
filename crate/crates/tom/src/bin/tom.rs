fn main() {
    std::process::exit(tom::cli::run(std::env::args_os()));
}
