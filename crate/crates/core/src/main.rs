fn main() {
    std::process::exit(ctxfer::cli::main_with_args(std::env::args_os()));
}
