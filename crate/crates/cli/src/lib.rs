//! Command-line front end: figure data, beam reports and config checks.

pub mod config;
pub mod figures;
pub mod output;
pub mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thermocav::ModelKind;

use config::{Format, RunConfig};
use figures::{Context, FigureName};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<thermocav::Error> for CliError {
    fn from(e: thermocav::Error) -> Self {
        match e {
            thermocav::Error::Domain(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Drude,
    Plasma,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Drude => ModelKind::Drude,
            ModelArg::Plasma => ModelKind::Plasma,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "thermocav", version, about = "Thermal fields, Casimir pressure and hyperfine rates in a metallic cavity")]
pub struct Cli {
    /// TOML run configuration; defaults are used when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file; overrides `output.path`, stdout when neither is set.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Overrides `output.format`.
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Permittivity model of the mirrors.
    #[arg(long, global = true)]
    pub model: Option<ModelArg>,
    /// Number of abscissa points.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(2..))]
    pub points: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Writes the data of one figure.
    Figure { name: FigureName },
    /// Simulates the atomic beam and writes the exit populations.
    RunBeam,
    /// Checks the configuration and prints its hash.
    ValidateConfig,
}

/// Hashed into the metadata: the parsed config plus data-changing flags.
#[derive(Serialize)]
struct Effective<'a> {
    config: &'a RunConfig,
    model: Option<ModelKind>,
    points: Option<u64>,
}

/// Runs a parsed command line and returns the text to emit.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let config = RunConfig::load(cli.config.as_deref())?;
    let model = cli.model.map(ModelKind::from);
    let hash = {
        use sha2::{Digest, Sha256};
        let effective = Effective {
            config: &config,
            model,
            points: cli.points,
        };
        let json = serde_json::to_string(&effective).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect::<String>()
    };
    let format = cli.format.unwrap_or(config.output.format);
    let text = match &cli.command {
        Command::ValidateConfig => format!("ok {hash}\n"),
        Command::Figure { name } => {
            let ctx = Context {
                config: &config,
                model,
                points: cli.points.map(|n| n as usize),
                config_sha256: hash,
            };
            ctx.figure(*name)?.render(format)
        }
        Command::RunBeam => report::run_beam(&config, model, hash)?.render(format),
    };
    if matches!(cli.command, Command::ValidateConfig) {
        return Ok(text);
    }
    match cli.output.as_ref().or(config.output.path.as_ref()) {
        Some(path) => {
            std::fs::write(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

/// Entry point shared by the binary and the tests.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("thermocav: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
