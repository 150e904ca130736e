fn main() {
    std::process::exit(impnet::cli::run(std::env::args_os()));
}
