fn main() {
    std::process::exit(coax::cli::run(std::env::args_os()));
}
