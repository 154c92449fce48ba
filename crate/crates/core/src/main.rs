fn main() {
    std::process::exit(hocd::cli::main_with_args(std::env::args_os()));
}
