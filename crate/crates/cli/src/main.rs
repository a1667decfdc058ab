mod config;
mod ingest;
mod run;

use std::io::{self, Write};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use config::{Cli, OutputFormat, RunConfig};

const EXIT_INPUT_ERROR: u8 = 1;
const EXIT_VERIFICATION_FAILED: u8 = 2;

fn write_report(outcome: &run::Outcome, format: OutputFormat) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &outcome.report)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            let indices = outcome.indices.as_ref().context("this command selects no rows")?;
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["index"])?;
            for i in indices {
                w.write_record([i.to_string()])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = RunConfig::from_cli(&cli).and_then(|cfg| {
        if let Some(threads) = cli.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .context("cannot configure the thread pool")?;
        }
        let outcome = run::run(&cfg)?;
        write_report(&outcome, cfg.output)?;
        Ok(outcome.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFICATION_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT_ERROR)
        }
    }
}
