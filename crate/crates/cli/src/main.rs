fn main() {
    std::process::exit(gronwall_cli::run(std::env::args_os()));
}
