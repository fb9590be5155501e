use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use eba_cli::args::Cli;
use eba_cli::{output_path, run, CliError};

fn write(cli: &Cli, text: &str) -> Result<(), CliError> {
    match output_path(cli) {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::compute(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|text| write(&cli, &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eba: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
