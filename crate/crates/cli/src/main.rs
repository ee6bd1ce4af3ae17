fn main() {
    std::process::exit(gjms_cli::run(std::env::args_os()));
}
