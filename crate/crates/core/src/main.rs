fn main() {
    std::process::exit(genbayes::cli::main_with_args(std::env::args_os()));
}
