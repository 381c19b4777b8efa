mod commands;
mod config;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::CliConfig;

#[derive(Parser, Debug)]
#[command(name = "psector", version, about = "Explicit p-harmonic functions in planar sectors")]
struct Cli {
    /// TOML file with default values; flags win over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides PSECTOR_OUT_DIR and the config file).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Radial exponent k(nu, p), or a table of it.
    Exponent(commands::ExponentArgs),
    /// Angular profile table written as CSV.
    Profile(commands::ProfileArgs),
    /// Numerical p-harmonic measure of the arc.
    Measure(commands::MeasureArgs),
    /// Run a verification suite.
    Verify(verify::VerifyArgs),
}

/// Failure carrying its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Failure::new(2, message)
    }
}

impl From<psector::Error> for Failure {
    fn from(e: psector::Error) -> Self {
        match e {
            psector::Error::Invariant { .. } => Failure::new(3, e.to_string()),
            psector::Error::Domain(_) => Failure::usage(e.to_string()),
            other => Failure::new(2, other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = match &cli.config {
        Some(path) => CliConfig::load(path).map_err(Failure::usage)?,
        None => CliConfig::default(),
    };
    let out = cfg.out_dir(cli.out_dir.as_deref());
    match cli.command {
        Command::Exponent(a) => commands::exponent(&a, &out),
        Command::Profile(a) => commands::profile(&a, &cfg, &out),
        Command::Measure(a) => commands::measure(&a, &cfg, &out),
        Command::Verify(a) => verify::verify(&a, &cfg, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
