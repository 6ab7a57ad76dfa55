use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = dimmsb::cli::Cli::parse();
    if let Err(e) = dimmsb::cli::run(cli) {
        eprintln!("error: {e}");
        if let Some(hint) = dimmsb::cli::hint(&e) {
            eprintln!("hint: {hint}");
        }
        std::process::exit(e.exit_code());
    }
}
