fn main() {
    std::process::exit(rdsir_cli::run(std::env::args_os()));
}
