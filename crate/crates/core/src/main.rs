fn main() {
    std::process::exit(edgespike::cli::run(std::env::args_os()));
}
