fn main() {
    std::process::exit(arproc::cli::main_with_args(std::env::args_os()));
}
