fn main() {
    std::process::exit(ioncat::cli::main_with_args(std::env::args_os()));
}
