fn main() {
    env_logger::init();
    let code = multiclock::cli::main_with_args(std::env::args_os(), &mut std::io::stdout());
    std::process::exit(code);
}
