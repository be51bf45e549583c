fn main() {
    std::process::exit(brinkmann::cli::run(std::env::args_os()));
}
