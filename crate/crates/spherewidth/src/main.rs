use std::process::ExitCode;

use clap::Parser;
use spherewidth::config::Cli;
use spherewidth::error::{CliError, EXIT_CONFIG};

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match spherewidth::threads_from_env() {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                eprintln!("{e}");
                return ExitCode::from(EXIT_CONFIG as u8);
            }
        }
        Ok(None) => {}
        Err(msg) => return fail(&CliError::Config(msg)),
    }
    match spherewidth::execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
