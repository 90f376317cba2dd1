fn main() {
    std::process::exit(chanmi::cli::main_with_args(std::env::args_os()));
}
