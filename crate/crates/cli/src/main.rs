use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = circloss_cli::Cli::parse();
    match circloss_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
