fn main() {
    std::process::exit(contractive_cli::run(std::env::args_os()));
}
