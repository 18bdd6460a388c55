use std::process::ExitCode;

use clap::Parser;
use tracing_subscriber::EnvFilter;

use navvi_gateway::cli::{execute, Cli};

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_env("NAVVI_LOG").unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("navvi: {err:#}");
            ExitCode::FAILURE
        }
    }
}
