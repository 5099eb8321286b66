mod args;
mod commands;
mod output;

use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use args::{Cli, Command, EnsembleArgs};

fn with_workers<T>(ens: &EnsembleArgs, f: impl FnOnce() -> Result<T> + Send) -> Result<T>
where
    T: Send,
{
    match ens.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()?
            .install(f),
        None => f(),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analyze(a) => commands::analyze(&a)?,
        Command::Baseline(b) => with_workers(&b.ensemble, || commands::baseline(&b))?,
        Command::Zscore(z) => with_workers(&z.ensemble, || commands::zscore(&z))?,
        Command::Validate(v) => {
            if !commands::validate_cmd(&v)? {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Segment(s) => commands::segment_cmd(&s)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
