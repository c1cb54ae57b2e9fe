use std::process::ExitCode;

use clap::Parser;
use omnifair::cli::{configure_threads, error_report, exit_code, main_with, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::parse();
    if let Err(err) = configure_threads() {
        eprintln!("omnifair: {err}");
        println!(
            "{}",
            serde_json::to_string_pretty(&error_report(&err)).expect("error serializes")
        );
        return ExitCode::from(exit_code(&err) as u8);
    }
    ExitCode::from(main_with(&config) as u8)
}
