use std::io::Write;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use mvd::cli::{self, Cli};

fn main() -> ExitCode {
    let args = Cli::parse();
    if let Some(msg) = args.usage_error() {
        Cli::command()
            .error(clap::error::ErrorKind::ArgumentConflict, msg)
            .exit();
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli::run(&args, &mut out) {
        Ok(()) => {
            let _ = out.flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
