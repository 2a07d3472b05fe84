fn main() {
    std::process::exit(nuca::cli::run(std::env::args_os()));
}
