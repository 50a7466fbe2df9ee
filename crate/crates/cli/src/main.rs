use std::io;
use std::process::ExitCode;

use clap::Parser;

use rrr_cli::{dispatch, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    match dispatch(&cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rrr: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
