fn main() {
    std::process::exit(plansim::cli::run());
}
