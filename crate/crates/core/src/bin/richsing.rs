fn main() {
    std::process::exit(richsing::cli::run(std::env::args_os()));
}
