mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// A problem with how the program was invoked.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

const EXIT_USAGE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_ACCURACY: u8 = 3;

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(err) = cause.downcast_ref::<bosonkit::Error>() {
            return match err {
                bosonkit::Error::Accuracy { .. } => EXIT_ACCURACY,
                _ => EXIT_INVALID,
            };
        }
    }
    EXIT_INVALID
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Unitary(a) => commands::unitary(&a),
        Command::Dist(a) => commands::dist(&a),
        Command::Correction(a) => commands::correction(&commands::with_sweep_defaults(a)),
        Command::Sample(a) => commands::sample_cmd(&a),
        Command::Pkm(a) => commands::pkm(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(bosonkit::Error::SizeCap { .. }) = e.downcast_ref::<bosonkit::Error>() {
                eprintln!(
                    "hint: set {} to raise the cap",
                    bosonkit::limits::SIZE_CAP_ENV
                );
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
