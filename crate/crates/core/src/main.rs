use std::process::ExitCode;

use clap::Parser;
use periodring::cli::{run, CliArgs};

fn main() -> ExitCode {
    let config = match CliArgs::parse().resolve() {
        Ok(config) => config,
        Err(err) => {
            eprintln!("periodcheck: {err}");
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    let report = match run(&config) {
        Ok(report) => report,
        Err(err) => {
            eprintln!("periodcheck: {err}");
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match &config.out {
        Some(path) => {
            if let Err(err) = report.write_to(path) {
                eprintln!("periodcheck: {err}");
                return ExitCode::from(err.exit_code() as u8);
            }
        }
        None => println!("{}", report.to_json_pretty()),
    }
    let s = &report.summary;
    eprintln!("periodcheck: {} entries, {} passed, {} failed", s.entries, s.passed, s.failed);
    ExitCode::from(report.exit_code() as u8)
}
