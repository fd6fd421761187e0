//! `streammotion` binary: every toolkit operation behind one CLI.
//!
//! Exit codes: 0 success, 2 validation/usage error, 1 runtime error.

mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn run(cli: &Cli) -> anyhow::Result<()> {
    let config = config::resolve_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Attend(a) => commands::attend(&config, a),
        Command::Smooth(a) => commands::smooth(&config, a),
        Command::Mask(a) => commands::mask(&config, a),
        Command::Scale(a) => commands::scale(&config, a),
        Command::Spectrogram(a) => commands::spectrogram_cmd(&config, a),
        Command::Metrics(a) => commands::metrics(&config, a),
        Command::Synth(a) => commands::synth(a),
        Command::Run(a) => commands::run(&config, a),
        Command::Delay(a) => commands::delay(a),
    }
}

/// Invalid inputs and configuration exit with 2, runtime failures with 1.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    let validation = err.chain().any(|cause| {
        cause
            .downcast_ref::<streammotion_core::Error>()
            .is_some_and(|e| e.is_validation())
            || cause.to_string().starts_with("config:")
            || cause.to_string().contains("unknown config key")
    });
    if validation {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
