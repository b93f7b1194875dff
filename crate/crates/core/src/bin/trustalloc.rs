fn main() {
    std::process::exit(trustalloc::cli::run(std::env::args_os()));
}
