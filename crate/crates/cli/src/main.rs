fn main() {
    std::process::exit(slowhom_cli::run(std::env::args_os()));
}
