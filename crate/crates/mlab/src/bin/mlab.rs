fn main() {
    let code = mlab::cli::main_with(std::env::args());
    std::process::exit(code);
}
