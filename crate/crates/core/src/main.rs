fn main() {
    std::process::exit(capflp::cli::run(std::env::args_os()));
}
