fn main() {
    std::process::exit(etsmc::scenario::cli::main_with_args(std::env::args_os()));
}
