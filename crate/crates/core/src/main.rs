fn main() {
    std::process::exit(szilard::cli::run(std::env::args_os()));
}
