use std::process::ExitCode;

use sor::cli::{self, CliError};

fn main() -> ExitCode {
    let config = match cli::parse_cli(std::env::args_os().skip(1)) {
        Ok(c) => c,
        Err(CliError::Info(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(CliError::Usage(msg)) => {
            eprint!("{msg}");
            if !msg.ends_with('\n') {
                eprintln!();
            }
            return ExitCode::from(cli::EXIT_USAGE as u8);
        }
    };
    match cli::run(&config) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::EXIT_USAGE as u8)
        }
    }
}
