fn main() {
    std::process::exit(cogsec::cli::main_with_args(std::env::args_os()));
}
