use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = kpsc::cli::Cli::parse();
    match kpsc::cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kpsc: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
