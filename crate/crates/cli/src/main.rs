use std::process::ExitCode;

use clap::Parser;
use relcode_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("relcode: {failure}");
            ExitCode::from(failure.code)
        }
    }
}
