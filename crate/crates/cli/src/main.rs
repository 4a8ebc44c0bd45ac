use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use voltsched_cli::{run, Cli, EXIT_PARSE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // --help and --version are not errors
            return if err.use_stderr() {
                ExitCode::from(EXIT_PARSE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(report) => {
            let (mut stdout, mut stderr) = (std::io::stdout().lock(), std::io::stderr().lock());
            if report.document.is_empty() {
                let _ = stdout.write_all(report.summary.as_bytes());
            } else {
                let _ = stdout.write_all(report.document.as_bytes());
                let _ = stderr.write_all(report.summary.as_bytes());
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
