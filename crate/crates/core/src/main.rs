fn main() {
    std::process::exit(tclock::cli::run(std::env::args_os()));
}
