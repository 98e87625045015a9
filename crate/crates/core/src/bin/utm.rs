fn main() {
    std::process::exit(unified_transform::cli::run(std::env::args_os()));
}
