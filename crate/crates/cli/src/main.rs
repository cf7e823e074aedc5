fn main() {
    std::process::exit(nagell_cli::run(std::env::args_os()));
}
