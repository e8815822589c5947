fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let code = nsch_cli::main_with(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    log::debug!("exit code {code}");
    std::process::exit(code);
}
