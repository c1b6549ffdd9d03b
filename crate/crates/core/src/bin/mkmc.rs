use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MKMC_LOG", "warn")).init();
    let cli = mkmc::cli::Cli::parse();
    if let Err(err) = mkmc::cli::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
