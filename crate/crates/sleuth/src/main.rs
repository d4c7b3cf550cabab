fn main() {
    std::process::exit(cascade_sleuth::cli::main_with_args(std::env::args_os()));
}
