fn main() {
    std::process::exit(rsac::cli::run(std::env::args_os()));
}
