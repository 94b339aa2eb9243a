fn main() {
    std::process::exit(qresb::cli::main());
}
