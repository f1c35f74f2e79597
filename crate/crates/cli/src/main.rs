fn main() {
    let code = tomopoly_cli::commands::run_command(std::env::args_os());
    std::process::exit(code);
}
