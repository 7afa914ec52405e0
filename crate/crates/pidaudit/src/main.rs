fn main() {
    std::process::exit(pidaudit::cli::run());
}
