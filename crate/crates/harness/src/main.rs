use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QRL_LOG", "error"))
        .format_timestamp(None)
        .init();
    let cli = qrl_harness::cli::Cli::parse();
    if let Err(e) = qrl_harness::cli::execute(cli) {
        eprintln!("qrl: {e}");
        std::process::exit(e.exit_code());
    }
}
