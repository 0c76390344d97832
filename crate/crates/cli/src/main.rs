use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use epr_core::experiment::{run, OutputFormat};
use thiserror::Error;

mod args;

pub use args::parse_config;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(clap::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error on {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Run(epr_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Run(epr_core::Error::Validation { .. }) => 2,
            CliError::Run(_) => 1,
        }
    }
}

fn real_main() -> Result<(), CliError> {
    let config = parse_config(std::env::args_os())?;

    // open the destination first so a bad path fails before the run
    let mut sink: Box<dyn Write> = match &config.output {
        Some(path) => Box::new(File::create(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?),
        None => Box::new(io::stdout().lock()),
    };
    let report = run(&config).map_err(CliError::Run)?;
    let text = match config.format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => report.to_csv(),
    };
    let out_path = config.output.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    sink.write_all(text.as_bytes())
        .and_then(|_| sink.flush())
        .map_err(|source| CliError::Io {
            path: out_path,
            source,
        })
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(e)) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("epr-sim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
