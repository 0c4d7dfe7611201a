fn main() {
    std::process::exit(rydberg_source::cli::main_with_args(std::env::args_os()));
}
