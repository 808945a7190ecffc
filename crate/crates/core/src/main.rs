fn main() {
    std::process::exit(projeq::cli::main());
}
