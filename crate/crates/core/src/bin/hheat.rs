fn main() {
    std::process::exit(hheat::cli::run(std::env::args_os()));
}
