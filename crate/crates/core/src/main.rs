use std::process::ExitCode;

use clap::Parser;
use tlsm::cli::{self, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli::init_threads().and_then(|_| cli::run(&cli, &mut std::io::stdout().lock()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("tlsm: error: {err}");
            ExitCode::from(cli::exit_code(&err) as u8)
        }
    }
}
