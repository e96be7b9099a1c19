fn main() {
    std::process::exit(mvphase::cli::run());
}
