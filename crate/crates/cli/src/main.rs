fn main() {
    std::process::exit(nucleation_cli::run(std::env::args_os()));
}
