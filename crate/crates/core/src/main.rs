fn main() {
    std::process::exit(copol::cli::main_from_env());
}
