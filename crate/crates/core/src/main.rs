fn main() {
    std::process::exit(aquaplan::cli::run());
}
