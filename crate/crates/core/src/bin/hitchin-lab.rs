fn main() {
    std::process::exit(hitchin_lab::cli::main_with_args(std::env::args_os()));
}
