fn main() {
    std::process::exit(qeraser::cli::run(std::env::args_os()));
}
