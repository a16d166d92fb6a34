fn main() {
    std::process::exit(bkmeans::cli::main_with(std::env::args_os()));
}
