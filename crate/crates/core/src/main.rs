fn main() {
    std::process::exit(mcqed::cli::run(std::env::args_os()));
}
