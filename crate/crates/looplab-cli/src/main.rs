use clap::Parser;
use looplab_cli::{execute, Cli, EXIT_USAGE};
use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("verify: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &outcome.document),
        None => std::io::stdout().write_all(outcome.document.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("verify: cannot write report: {e}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    eprintln!("verify: {}", outcome.summary);
    ExitCode::from(outcome.exit_code as u8)
}
