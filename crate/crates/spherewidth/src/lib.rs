//! Command-line front end for `spherewidth-core`: kernel selection, experiment
//! drivers and CSV/JSON output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};

use config::Cli;
use error::CliResult;

pub const THREADS_ENV: &str = "SPHEREWIDTH_THREADS";

/// Runs one command and writes its output (and summary, if requested).
pub fn execute(cli: &Cli) -> CliResult<()> {
    let report = commands::run(&cli.command)?;
    let out = cli.command.output();
    let name = cli.command.name();
    let config = serde_json::to_value(&cli.command).map_err(|e| error::CliError::Io(e.into()))?;
    match &out.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            output::write_report(&report, out.format, name, config.clone(), &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            output::write_report(&report, out.format, name, config.clone(), &mut w)?;
            w.flush()?;
        }
    }
    if let Some(path) = &out.summary {
        let mut v = output::to_json(&report, name, config);
        if let Some(obj) = v.as_object_mut() {
            obj.remove("rows");
        }
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &v).map_err(|e| error::CliError::Io(e.into()))?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(())
}

/// Thread count from the environment, if set to a positive integer.
pub fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            )),
        },
    }
}
