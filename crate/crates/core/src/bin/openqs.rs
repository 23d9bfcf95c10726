fn main() {
    std::process::exit(openqs::cli::main_from(std::env::args_os()));
}
