use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use depthlab_cli::{dispatch, Cli, EXIT_ERROR};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let status = match dispatch(&cli.command, &mut stdout) {
        Ok(status) => status,
        // a closed pipe (`| head`) is the reader's choice, not a failure
        Err(err) if is_broken_pipe(&err) => return ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            EXIT_ERROR
        }
    };
    let _ = stdout.flush();
    ExitCode::from(status as u8)
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain()
        .filter_map(|e| e.downcast_ref::<std::io::Error>())
        .any(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
}
