fn main() {
    std::process::exit(covertree::run(std::env::args_os()));
}
