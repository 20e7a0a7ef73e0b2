fn main() {
    std::process::exit(name_loom::cli::run(std::env::args_os()));
}
