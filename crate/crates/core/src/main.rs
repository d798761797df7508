fn main() {
    std::process::exit(lassolab::cli::run(std::env::args_os()));
}
