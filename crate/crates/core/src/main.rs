fn main() {
    std::process::exit(levy_clt::cli::run(std::env::args_os()));
}
