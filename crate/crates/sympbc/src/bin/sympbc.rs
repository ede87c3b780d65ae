fn main() {
    std::process::exit(sympbc::cli::main_from_args(std::env::args_os()));
}
