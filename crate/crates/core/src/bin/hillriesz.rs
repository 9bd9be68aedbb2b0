fn main() {
    std::process::exit(hillriesz::cli::main_with_args(std::env::args_os()));
}
