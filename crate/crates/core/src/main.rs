fn main() {
    std::process::exit(crosswalk::cli::main_with_args(std::env::args_os()));
}
