fn main() {
    std::process::exit(cutforge::cli::run(std::env::args_os()));
}
