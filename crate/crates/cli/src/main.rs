fn main() {
    std::process::exit(dqpt_cli::run(std::env::args_os()));
}
