fn main() {
    std::process::exit(prosody_cli::run(std::env::args_os()));
}
