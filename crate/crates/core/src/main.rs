fn main() {
    std::process::exit(cylint::cli::run());
}
