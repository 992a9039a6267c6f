mod cli;
mod commands;
mod config;
mod error;
mod run;
mod verify_all;

use clap::error::ErrorKind;
use clap::Parser;

use crate::cli::Cli;
use crate::error::{CliError, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};

fn print_error(e: &CliError) {
    let body = serde_json::json!({ "error": e.report() });
    println!(
        "{}",
        serde_json::to_string_pretty(&body).unwrap_or_else(|_| e.to_string())
    );
}

fn real_main() -> i32 {
    iadof::use_sequential_linear_algebra();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return EXIT_PASS;
        }
        Err(e) => {
            let _ = e.print();
            print_error(&CliError::Usage(e.kind().to_string()));
            return EXIT_USAGE;
        }
    };
    match cli.resolve().and_then(|cfg| run::run(&cfg)) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            print_error(&e);
            e.exit_code()
        }
    }
}

fn main() {
    std::process::exit(real_main());
}
