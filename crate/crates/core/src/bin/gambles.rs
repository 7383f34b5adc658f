fn main() {
    std::process::exit(gambles::cli::run(std::env::args_os()));
}
